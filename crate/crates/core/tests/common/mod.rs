#![allow(dead_code)]

use mixsynth::matkit::random_symplectic;
use mixsynth::sysmodel::canonical_ito;
use mixsynth::{Dimensions, GeneralSystem, StandardSystem};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn mixed_feedback() -> StandardSystem {
    let a = DMatrix::from_row_slice(
        3,
        3,
        &[-9.0, -3.0, -1.0, 1.0, -7.0, -3.0, -0.72, -0.6, -12.0],
    );
    #[rustfmt::skip]
    let b = DMatrix::from_row_slice(3, 6, &[
        1.0, 2.0, -7.0, 0.0, -3.0, 5.0,
        2.0, 5.0, 1.0, -3.0, 6.0, -8.0,
        0.0, 0.12, 0.0, 0.0, 0.0, -0.16,
    ]);
    let c = DMatrix::from_row_slice(3, 3, &[38.0, 46.0, -42.0, 0.31, 0.4, 0.35, 4.2, -6.0, 5.0]);
    #[rustfmt::skip]
    let d = DMatrix::from_row_slice(3, 6, &[
        8.0, 0.0, 10.0, 0.0, 6.0, 0.0,
        0.0, 0.04, 0.0, 0.05, 0.0, 0.03,
        0.0, 0.8, 0.0, -1.0, 0.0, 0.6,
    ]);
    StandardSystem::new(Dimensions::new(1, 1, 3, 1, 1), a, b, c, d)
}

pub fn damped_cavity() -> StandardSystem {
    let i2 = DMatrix::<f64>::identity(2, 2);
    StandardSystem::new(
        Dimensions::new(1, 0, 1, 1, 0),
        &i2 * -0.5,
        i2.clone(),
        -&i2,
        i2,
    )
}

pub fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-scale..=scale))
}

/// `I + X` with small random `X`: well-conditioned and invertible.
pub fn near_identity(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n) + uniform(rng, n, n, 0.3 / (n.max(1) as f64).sqrt())
}

/// Deterministic walk over the dimension grid n_q ≤ 3, n_c ≤ 3, 1 ≤ m ≤ 4,
/// n_yq ≤ m, n_yc ≤ 3.
pub fn grid_dims(index: u64) -> Dimensions {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ index);
    let n_q = rng.gen_range(0..=3);
    let n_c = rng.gen_range(0..=3);
    let m = rng.gen_range(1..=4);
    let n_yq = rng.gen_range(0..=m);
    let n_yc = rng.gen_range(0..=3);
    let n_w1 = rng.gen_range(0..=m);
    Dimensions::new(n_q, n_c, m, n_yq, n_yc).with_w_split(n_w1)
}

/// Pulls a standard-form system back to a general form through random
/// invertible state and output transformations `N`, `M` and an input map `T`:
/// `𝐀 = N⁻¹AN`, `𝐁 = N⁻¹BT⁻¹`, `𝐂 = M⁻¹CN`, `𝐃 = M⁻¹DT⁻¹`, `𝚯 = N⁻¹Θ_nN⁻ᵀ`,
/// `F_v = T F_w Tᵀ`, `F_y = 𝐃F_v𝐃ᵀ`.
pub fn pullback(sys: &StandardSystem, seed: u64) -> GeneralSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = sys.dims;
    let st = sys.structure();
    let n_mat = near_identity(&mut rng, dims.n());
    let m_mat = near_identity(&mut rng, dims.n_y());
    let t = random_symplectic(&mut rng, dims.m, 0.2) * near_identity(&mut rng, 2 * dims.m);
    let n_inv = n_mat.clone().try_inverse().unwrap();
    let m_inv = m_mat.clone().try_inverse().unwrap();
    let t_inv = t.clone().try_inverse().unwrap();
    let to_c = |m: &DMatrix<f64>| m.map(|v| Complex64::new(v, 0.0));
    let f_v = to_c(&t) * canonical_ito(dims.m) * to_c(&t.transpose());
    let d = &m_inv * &sys.d * &t_inv;
    let f_y = to_c(&d) * &f_v * to_c(&d.transpose());
    GeneralSystem {
        a: &n_inv * &sys.a * &n_mat,
        b: &n_inv * &sys.b * &t_inv,
        c: &m_inv * &sys.c * &n_mat,
        d,
        theta: &n_inv * &st.theta_n * n_inv.transpose(),
        f_v: (&f_v + f_v.adjoint()) * Complex64::new(0.5, 0.0),
        f_y: (&f_y + f_y.adjoint()) * Complex64::new(0.5, 0.0),
    }
}

/// Eigenvalues of `a` all have negative real part.
pub fn is_hurwitz(a: &DMatrix<f64>) -> bool {
    a.nrows() == 0 || a.complex_eigenvalues().iter().all(|z| z.re < -1e-6)
}
