//! Entanglement experiments: singlet correlations, CHSH sweeps, a local
//! hidden-variable baseline, and the three-spin GHZ parity system.

use std::f64::consts::PI;
use std::sync::LazyLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::ComplexMatrix;
use crate::measure::{JointRecord, JointSampler};
use crate::observables::{pauli, spin_along, Axis, Observable};
use crate::rng::CounterRng;
use crate::states::{pure_expectation, PureState};
use crate::tol;

/// A Stern-Gerlach magnet orientation: a unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSetting {
    direction: [f64; 3],
}

impl DetectorSetting {
    pub fn new(direction: [f64; 3]) -> Result<Self> {
        let norm_sq: f64 = direction.iter().map(|x| x * x).sum();
        if (norm_sq.sqrt() - 1.0).abs() > tol::ORTHO {
            return Err(Error::InvalidArgument {
                reason: format!("detector direction must be a unit vector, |n| = {}", norm_sq.sqrt()),
            });
        }
        Ok(Self { direction })
    }

    pub fn from_polar(theta: f64, phi: f64) -> Self {
        Self {
            direction: [
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ],
        }
    }

    /// Setting at `angle` from the z axis, in the z-x plane — the usual
    /// parametrization for coplanar CHSH sweeps.
    pub fn in_plane(angle: f64) -> Self {
        Self {
            direction: [angle.sin(), 0.0, angle.cos()],
        }
    }

    pub fn direction(&self) -> [f64; 3] {
        self.direction
    }

    pub fn dot(&self, other: &DetectorSetting) -> f64 {
        self.direction
            .iter()
            .zip(&other.direction)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn angle_to(&self, other: &DetectorSetting) -> f64 {
        self.dot(other).clamp(-1.0, 1.0).acos()
    }

    /// The spin component `s . n` this setting measures.
    pub fn spin_operator(&self) -> ComplexMatrix {
        spin_along(self.direction)
    }
}

/// The two-spin total-spin-zero state `(|ud> - |du>) / sqrt2` in the kron
/// basis `{uu, ud, du, dd}`.
pub fn singlet() -> PureState {
    let s = 0.5_f64.sqrt();
    let c = Complex64::new;
    PureState::new(vec![c(0., 0.), c(s, 0.), c(-s, 0.), c(0., 0.)]).expect("unit norm")
}

/// `<Psi_0| (s.a)(s.b) |Psi_0> = -(1/4) a.b`: the singlet's fluctuation
/// average for spin components along `a` and `b`.
pub fn spin_correlation(a: &DetectorSetting, b: &DetectorSetting) -> f64 {
    let op = a.spin_operator().kron(&b.spin_operator());
    pure_expectation(&singlet(), &op).expect("4x4 Hermitian by construction")
}

/// The same correlation in the +-1-outcome normalization `sigma = 2 s`,
/// i.e. `E(a, b) = -a.b`.
pub fn sigma_correlation(a: &DetectorSetting, b: &DetectorSetting) -> f64 {
    4.0 * spin_correlation(a, b)
}

/// CHSH combination `S = E(a,b) - E(a,b') + E(a',b) + E(a',b')` with the
/// +-1-normalized correlators; bounded by 2 sqrt2 for the singlet.
pub fn chsh_value(
    a: &DetectorSetting,
    a_prime: &DetectorSetting,
    b: &DetectorSetting,
    b_prime: &DetectorSetting,
) -> f64 {
    sigma_correlation(a, b) - sigma_correlation(a, b_prime)
        + sigma_correlation(a_prime, b)
        + sigma_correlation(a_prime, b_prime)
}

/// The settings `(a, a', b, b') = (0, 90, 45, 135) degrees` in one plane,
/// where the quantum CHSH value reaches `2 sqrt2`.
pub fn chsh_optimal_settings() -> [DetectorSetting; 4] {
    [
        DetectorSetting::in_plane(0.0),
        DetectorSetting::in_plane(PI / 2.0),
        DetectorSetting::in_plane(PI / 4.0),
        DetectorSetting::in_plane(3.0 * PI / 4.0),
    ]
}

/// Monte Carlo estimate of the +-1-normalized singlet correlation by joint
/// sampling of the two commuting site measurements. Returns the estimate
/// and its standard error.
pub fn sigma_correlation_mc(
    a: &DetectorSetting,
    b: &DetectorSetting,
    shots: u64,
    rng: &mut CounterRng,
) -> Result<(f64, f64)> {
    if shots == 0 {
        return Err(Error::InvalidArgument {
            reason: "need at least one shot".into(),
        });
    }
    let i2 = ComplexMatrix::identity(2);
    let site_a = Observable::new(a.spin_operator().kron(&i2))?;
    let site_b = Observable::new(i2.kron(&b.spin_operator()))?;
    let sampler = JointSampler::new(&singlet(), &[&site_a, &site_b])?;
    let mut sum = 0i64;
    for _ in 0..shots {
        let rec = sampler.draw(rng);
        let product = rec.values[0].signum() * rec.values[1].signum();
        sum += product as i64;
    }
    let estimate = sum as f64 / shots as f64;
    let stderr = ((1.0 - estimate * estimate).max(0.0) / shots as f64).sqrt();
    Ok((estimate, stderr))
}

/// The shared-unit-vector local model: both stations see the same uniformly
/// random `lambda`, station A reports `sign(a.lambda)` and station B reports
/// `-sign(b.lambda)`. Analytically `E = -1 + 2 theta_ab / pi`.
pub fn hv_baseline_correlation(
    a: &DetectorSetting,
    b: &DetectorSetting,
    shots: u64,
    rng: &mut CounterRng,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidArgument {
            reason: "need at least one shot".into(),
        });
    }
    let mut sum = 0i64;
    for _ in 0..shots {
        let z = 2.0 * rng.next_f64() - 1.0;
        let phi = 2.0 * PI * rng.next_f64();
        let r = (1.0 - z * z).max(0.0).sqrt();
        let lambda = [r * phi.cos(), r * phi.sin(), z];
        let dot_a: f64 = a.direction().iter().zip(&lambda).map(|(x, y)| x * y).sum();
        let dot_b: f64 = b.direction().iter().zip(&lambda).map(|(x, y)| x * y).sum();
        let out_a = if dot_a >= 0.0 { 1 } else { -1 };
        let out_b = if dot_b >= 0.0 { -1 } else { 1 };
        sum += (out_a * out_b) as i64;
    }
    Ok(sum as f64 / shots as f64)
}

/// Closed form of the baseline model's correlation, `-1 + 2 theta / pi`.
pub fn hv_baseline_analytic(a: &DetectorSetting, b: &DetectorSetting) -> f64 {
    -1.0 + 2.0 * a.angle_to(b) / PI
}

/// CHSH combination of the analytic baseline correlators; linear in the
/// angles, so it never exceeds 2.
pub fn hv_chsh_analytic(
    a: &DetectorSetting,
    a_prime: &DetectorSetting,
    b: &DetectorSetting,
    b_prime: &DetectorSetting,
) -> f64 {
    hv_baseline_analytic(a, b) - hv_baseline_analytic(a, b_prime)
        + hv_baseline_analytic(a_prime, b)
        + hv_baseline_analytic(a_prime, b_prime)
}

/// The three-spin state `(|uuu> - |ddd>) / sqrt2`.
pub fn ghz_state() -> PureState {
    let s = 0.5_f64.sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    amps[0] = Complex64::new(s, 0.0);
    amps[7] = Complex64::new(-s, 0.0);
    PureState::new(amps).expect("unit norm")
}

/// The four commuting three-site parity operators of the GHZ system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MerminOperator {
    M1,
    M2,
    M3,
    M4,
}

impl MerminOperator {
    pub const ALL: [MerminOperator; 4] = [Self::M1, Self::M2, Self::M3, Self::M4];

    pub fn label(&self) -> &'static str {
        match self {
            Self::M1 => "M1",
            Self::M2 => "M2",
            Self::M3 => "M3",
            Self::M4 => "M4",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "M1" | "m1" => Ok(Self::M1),
            "M2" | "m2" => Ok(Self::M2),
            "M3" | "m3" => Ok(Self::M3),
            "M4" | "m4" => Ok(Self::M4),
            other => Err(Error::InvalidArgument {
                reason: format!("unknown operator tag '{other}'"),
            }),
        }
    }

    /// Which Pauli axis each of the three sites measures.
    pub fn site_axes(&self) -> [Axis; 3] {
        match self {
            Self::M1 => [Axis::X, Axis::Y, Axis::Y],
            Self::M2 => [Axis::Y, Axis::X, Axis::Y],
            Self::M3 => [Axis::Y, Axis::Y, Axis::X],
            Self::M4 => [Axis::X, Axis::X, Axis::X],
        }
    }

    /// The GHZ eigenvalue, hence the product every run's three readings
    /// must satisfy: +1 for M1..M3 and -1 for M4.
    pub fn expected_product(&self) -> i8 {
        match self {
            Self::M4 => -1,
            _ => 1,
        }
    }

    /// The 8x8 matrix `sigma_1 sigma_2 sigma_3` with this operator's axes.
    pub fn matrix(&self) -> ComplexMatrix {
        let [a1, a2, a3] = self.site_axes();
        pauli(a1).kron(&pauli(a2)).kron(&pauli(a3))
    }
}

/// `sigma` on one of three sites, embedded in the 8-dimensional space.
pub fn site_sigma(site: usize, axis: Axis) -> ComplexMatrix {
    let i2 = ComplexMatrix::identity(2);
    let factor = |k: usize| if k == site { pauli(axis) } else { i2.clone() };
    factor(0).kron(&factor(1)).kron(&factor(2))
}

/// One GHZ parity run: three +-1 site readings from a single three-particle
/// event.
#[derive(Debug, Clone, Copy)]
pub struct GhzOutcome {
    pub which: MerminOperator,
    pub m1: i8,
    pub m2: i8,
    pub m3: i8,
    pub event_counter: u64,
}

impl GhzOutcome {
    pub fn product(&self) -> i8 {
        self.m1 * self.m2 * self.m3
    }
}

static GHZ_SAMPLERS: LazyLock<Vec<JointSampler>> = LazyLock::new(|| {
    MerminOperator::ALL
        .iter()
        .map(|which| {
            let [a1, a2, a3] = which.site_axes();
            let obs = [
                Observable::new(site_sigma(0, a1)).expect("Pauli kron is Hermitian"),
                Observable::new(site_sigma(1, a2)).expect("Pauli kron is Hermitian"),
                Observable::new(site_sigma(2, a3)).expect("Pauli kron is Hermitian"),
            ];
            JointSampler::new(&ghz_state(), &[&obs[0], &obs[1], &obs[2]])
                .expect("single-site observables on distinct factors commute")
        })
        .collect()
});

/// Samples one triple measurement on a fresh GHZ state. The three readings
/// come from a single draw — one three-particle decay event — and their
/// product satisfies the operator's parity exactly.
pub fn ghz_run(which: MerminOperator, rng: &mut CounterRng) -> GhzOutcome {
    let sampler = &GHZ_SAMPLERS[MerminOperator::ALL
        .iter()
        .position(|m| *m == which)
        .expect("operator is one of the four")];
    let JointRecord {
        values,
        event_counter,
    } = sampler.draw(rng);
    let sign = |v: f64| if v > 0.0 { 1i8 } else { -1i8 };
    let outcome = GhzOutcome {
        which,
        m1: sign(values[0]),
        m2: sign(values[1]),
        m3: sign(values[2]),
        event_counter,
    };
    assert_eq!(
        outcome.product(),
        which.expected_product(),
        "GHZ parity constraint violated; this is a solver bug"
    );
    outcome
}

/// What the four-operator system certifies: the parity operators commute
/// pairwise, yet their triple measurements cannot share site readings
/// because single-site components clash; and no classical assignment of
/// six +-1 values satisfies all four parities at once.
#[derive(Debug, Clone)]
pub struct IncompatibilityReport {
    /// `([Mi, Mj]` label, commutator max-norm); all six vanish.
    pub mermin_commutators: Vec<(String, f64)>,
    /// `|[sigma_1x, sigma_1y]|`, the clash that forbids sharing a site
    /// reading across runs (= 2).
    pub single_site_commutator_norm: f64,
    /// A joint measurement of one operator's three site observables is
    /// accepted.
    pub same_run_joint_accepted: bool,
    /// A joint measurement mixing x and y on the same site is refused.
    pub cross_run_joint_rejected: bool,
    /// The four product constraints, one per independent run.
    pub product_constraints: Vec<(String, i8)>,
    /// Number of the 64 classical site-value assignments satisfying all
    /// four constraints (zero).
    pub classical_assignments: usize,
}

pub fn ghz_incompatibility_demo() -> Result<IncompatibilityReport> {
    let ops = MerminOperator::ALL;
    let mut mermin_commutators = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let norm = ops[i].matrix().commutator(&ops[j].matrix())?.max_abs();
            mermin_commutators.push((
                format!("[{}, {}]", ops[i].label(), ops[j].label()),
                norm,
            ));
        }
    }

    let single_site_commutator_norm = pauli(Axis::X).commutator(&pauli(Axis::Y))?.max_abs();

    let m1_sites: Vec<Observable> = [Axis::X, Axis::Y, Axis::Y]
        .iter()
        .enumerate()
        .map(|(k, &ax)| Observable::new(site_sigma(k, ax)))
        .collect::<Result<_>>()?;
    let same_run_joint_accepted = JointSampler::new(
        &ghz_state(),
        &[&m1_sites[0], &m1_sites[1], &m1_sites[2]],
    )
    .is_ok();

    let s1x = Observable::new(site_sigma(0, Axis::X))?;
    let s1y = Observable::new(site_sigma(0, Axis::Y))?;
    let cross_run_joint_rejected = matches!(
        JointSampler::new(&ghz_state(), &[&s1x, &s1y]),
        Err(Error::Incompatible { .. })
    );

    let product_constraints = vec![
        ("m1x * m2y * m3y".to_string(), 1),
        ("m1y * m2x * m3y".to_string(), 1),
        ("m1y * m2y * m3x".to_string(), 1),
        ("m1x * m2x * m3x".to_string(), -1),
    ];

    // exhaustive search over shared site values m_{i,axis} in {-1, +1}
    let mut classical_assignments = 0;
    for bits in 0..64u32 {
        let val = |k: u32| if bits & (1 << k) != 0 { 1i32 } else { -1 };
        let (m1x, m1y) = (val(0), val(1));
        let (m2x, m2y) = (val(2), val(3));
        let (m3x, m3y) = (val(4), val(5));
        if m1x * m2y * m3y == 1
            && m1y * m2x * m3y == 1
            && m1y * m2y * m3x == 1
            && m1x * m2x * m3x == -1
        {
            classical_assignments += 1;
        }
    }

    Ok(IncompatibilityReport {
        mermin_commutators,
        single_site_commutator_norm,
        same_run_joint_accepted,
        cross_run_joint_rejected,
        product_constraints,
        classical_assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{partial_trace, BipartiteState};

    #[test]
    fn singlet_has_zero_total_spin() {
        let i2 = ComplexMatrix::identity(2);
        let mut s_sq = ComplexMatrix::zeros(4, 4);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let s_half = pauli(axis).scale(Complex64::new(0.5, 0.0));
            let total = s_half.kron(&i2).add(&i2.kron(&s_half)).unwrap();
            s_sq = s_sq.add(&total.mul(&total).unwrap()).unwrap();
        }
        let val = pure_expectation(&singlet(), &s_sq).unwrap();
        assert!(val.abs() < 1e-12);
        // in fact S^2 annihilates the state
        let sv = s_sq.apply(singlet().amplitudes()).unwrap();
        assert!(sv.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn singlet_marginal_is_maximally_mixed() {
        let rho = partial_trace(&BipartiteState::from_joint(&singlet(), 2).unwrap());
        let half_i = ComplexMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
        assert!(rho.matrix().max_abs_diff(&half_i) < 1e-12);
    }

    #[test]
    fn singlet_looks_the_same_in_the_x_basis() {
        let sx = Observable::new(pauli(Axis::X).scale(Complex64::new(0.5, 0.0))).unwrap();
        let u = &sx.eigen().eigenvectors;
        let coords = u.kron(u).dagger().apply(singlet().amplitudes()).unwrap();
        // antisymmetric combination of the two middle slots, nothing else
        assert!(coords[0].norm() < 1e-12);
        assert!(coords[3].norm() < 1e-12);
        assert!((coords[1].norm() - 0.5_f64.sqrt()).abs() < 1e-12);
        assert!((coords[1] + coords[2]).norm() < 1e-12);
    }

    #[test]
    fn correlation_at_equal_settings_is_minus_quarter() {
        let a = DetectorSetting::from_polar(1.2, 0.7);
        assert!((spin_correlation(&a, &a) + 0.25).abs() < 1e-12);
    }

    #[test]
    fn correlation_at_right_angles_vanishes() {
        let a = DetectorSetting::new([0.0, 0.0, 1.0]).unwrap();
        let b = DetectorSetting::new([1.0, 0.0, 0.0]).unwrap();
        assert!(spin_correlation(&a, &b).abs() < 1e-12);
    }

    #[test]
    fn correlation_at_two_thirds_pi() {
        let a = DetectorSetting::in_plane(0.0);
        let b = DetectorSetting::in_plane(2.0 * PI / 3.0);
        // -(1/4) cos(2 pi / 3) = +1/8
        assert!((spin_correlation(&a, &b) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn correlation_matches_minus_quarter_dot_on_random_settings() {
        let mut rng = CounterRng::new(61);
        for _ in 0..200 {
            let a = DetectorSetting::from_polar(PI * rng.next_f64(), 2.0 * PI * rng.next_f64());
            let b = DetectorSetting::from_polar(PI * rng.next_f64(), 2.0 * PI * rng.next_f64());
            let got = spin_correlation(&a, &b);
            assert!((got + 0.25 * a.dot(&b)).abs() < 1e-10);
        }
    }

    #[test]
    fn chsh_reaches_tsirelson_at_optimal_settings() {
        let [a, ap, b, bp] = chsh_optimal_settings();
        let s = chsh_value(&a, &ap, &b, &bp);
        assert!((s.abs() - 2.0 * 2.0_f64.sqrt()).abs() < 1e-12, "S = {s}");
    }

    #[test]
    fn chsh_with_all_equal_settings_is_two() {
        let a = DetectorSetting::in_plane(0.3);
        let s = chsh_value(&a, &a, &a, &a);
        assert!((s.abs() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn chsh_never_exceeds_tsirelson() {
        let mut rng = CounterRng::new(62);
        let rand_setting = |rng: &mut CounterRng| {
            DetectorSetting::from_polar(
                (2.0 * rng.next_f64() - 1.0).acos(),
                2.0 * PI * rng.next_f64(),
            )
        };
        let bound = 2.0 * 2.0_f64.sqrt() + 1e-9;
        for _ in 0..10_000 {
            let (a, ap) = (rand_setting(&mut rng), rand_setting(&mut rng));
            let (b, bp) = (rand_setting(&mut rng), rand_setting(&mut rng));
            assert!(chsh_value(&a, &ap, &b, &bp).abs() <= bound);
        }
    }

    #[test]
    fn mc_correlation_agrees_with_analytic() {
        let a = DetectorSetting::in_plane(0.0);
        let b = DetectorSetting::in_plane(1.0);
        let mut rng = CounterRng::new(63);
        let (est, se) = sigma_correlation_mc(&a, &b, 50_000, &mut rng).unwrap();
        let expect = sigma_correlation(&a, &b);
        assert!((est - expect).abs() < 4.0 * se, "{est} vs {expect}");
    }

    #[test]
    fn hv_baseline_perfectly_anticorrelated_at_zero_angle() {
        let a = DetectorSetting::from_polar(0.9, 0.4);
        let mut rng = CounterRng::new(64);
        let e = hv_baseline_correlation(&a, &a, 2_000, &mut rng).unwrap();
        assert_eq!(e, -1.0);
    }

    #[test]
    fn hv_baseline_uncorrelated_at_right_angles() {
        let a = DetectorSetting::new([0.0, 0.0, 1.0]).unwrap();
        let b = DetectorSetting::new([1.0, 0.0, 0.0]).unwrap();
        let shots = 100_000;
        let mut rng = CounterRng::new(65);
        let e = hv_baseline_correlation(&a, &b, shots, &mut rng).unwrap();
        assert!(e.abs() < 4.0 / (shots as f64).sqrt(), "E = {e}");
        assert!(hv_baseline_analytic(&a, &b).abs() < 1e-12);
    }

    #[test]
    fn hv_baseline_matches_its_analytic_form() {
        let mut rng = CounterRng::new(66);
        for k in 0..6 {
            let b = DetectorSetting::in_plane(PI * k as f64 / 5.0);
            let a = DetectorSetting::in_plane(0.0);
            let shots = 50_000;
            let e = hv_baseline_correlation(&a, &b, shots, &mut rng).unwrap();
            let expect = hv_baseline_analytic(&a, &b);
            let se = ((1.0 - expect * expect).max(1e-4) / shots as f64).sqrt();
            assert!((e - expect).abs() < 4.0 * se, "angle {k}: {e} vs {expect}");
        }
    }

    #[test]
    fn hv_baseline_respects_the_classical_chsh_bound() {
        let [a, ap, b, bp] = chsh_optimal_settings();
        let shots = 100_000u64;
        let mut rng = CounterRng::new(67);
        let e_ab = hv_baseline_correlation(&a, &b, shots, &mut rng).unwrap();
        let e_abp = hv_baseline_correlation(&a, &bp, shots, &mut rng).unwrap();
        let e_apb = hv_baseline_correlation(&ap, &b, shots, &mut rng).unwrap();
        let e_apbp = hv_baseline_correlation(&ap, &bp, shots, &mut rng).unwrap();
        let s = e_ab - e_abp + e_apb + e_apbp;
        let slack = 4.0 * 2.0 / (shots as f64).sqrt();
        assert!(s.abs() <= 2.0 + slack, "S_hv = {s}");
        assert!(hv_chsh_analytic(&a, &ap, &b, &bp).abs() <= 2.0 + 1e-12);
    }

    #[test]
    fn ghz_state_is_a_parity_eigenstate() {
        let psi = ghz_state();
        for which in MerminOperator::ALL {
            let mv = which.matrix().apply(psi.amplitudes()).unwrap();
            let sign = which.expected_product() as f64;
            let worst = mv
                .iter()
                .zip(psi.amplitudes())
                .map(|(got, want)| (got - want * sign).norm())
                .fold(0.0, f64::max);
            assert!(worst < 1e-10, "{}: residual {worst}", which.label());
        }
    }

    #[test]
    fn ghz_runs_satisfy_their_parity_exactly() {
        let mut rng = CounterRng::new(68);
        for which in MerminOperator::ALL {
            for _ in 0..2_000 {
                let run = ghz_run(which, &mut rng);
                assert_eq!(run.product(), which.expected_product());
            }
        }
    }

    #[test]
    fn ghz_single_site_readings_are_unbiased() {
        let mut rng = CounterRng::new(69);
        let shots = 20_000;
        let mut plus = 0u64;
        for _ in 0..shots {
            if ghz_run(MerminOperator::M1, &mut rng).m1 > 0 {
                plus += 1;
            }
        }
        let p = plus as f64 / shots as f64;
        let se = (0.25f64 / shots as f64).sqrt();
        assert!((p - 0.5).abs() < 4.0 * se, "p = {p}");
    }

    #[test]
    fn incompatibility_report_certifies_the_contradiction() {
        let report = ghz_incompatibility_demo().unwrap();
        assert_eq!(report.mermin_commutators.len(), 6);
        for (label, norm) in &report.mermin_commutators {
            assert!(*norm < 1e-10, "{label}: {norm}");
        }
        assert!((report.single_site_commutator_norm - 2.0).abs() < 1e-12);
        assert!(report.same_run_joint_accepted);
        assert!(report.cross_run_joint_rejected);
        assert_eq!(report.classical_assignments, 0);
        assert_eq!(report.product_constraints.len(), 4);
    }
}
