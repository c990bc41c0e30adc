//! Built-in manifolds used by tests and the command line.

use alloc::format;
use alloc::vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classify;
use crate::embedding::EmbeddingMap;
use crate::error::Result;
use crate::linalg::c;
use crate::normal_form::PreNormalForm;
use crate::perturb;
use crate::poly::Polynomial;

pub fn coffman(m: usize, n: usize) -> Result<EmbeddingMap> {
    classify::coffman_model(m, n)
}

/// Bishop surface w = |z|^2 + gamma (z^2 + zbar^2) in C^2.
pub fn bishop(gamma: f64) -> Result<EmbeddingMap> {
    let z = &Polynomial::variable(2, 0) + &Polynomial::variable(2, 1).scale(c(0.0, 1.0));
    let zb = z.conj();
    let w = &(&z * &zb) + &(&(&z * &z) + &(&zb * &zb)).scale(c(gamma, 0.0));
    Ok(EmbeddingMap::new(2, vec![z, w])?.with_label(format!("bishop({gamma})")))
}

/// Coefficient record with entries uniform in [-1, 1] from the seed.
pub fn random_record(m: usize, n: usize, seed: u64) -> Result<PreNormalForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PreNormalForm::random(m, n, 1.0, &mut rng)
}

/// A random record's graph embedding, moved into general position.
pub fn random(m: usize, n: usize, seed: u64, scale: f64) -> Result<EmbeddingMap> {
    let f = random_record(m, n, seed)?.to_embedding()?;
    Ok(perturb::random_general_position(&f, scale, seed)?.with_label(format!("random({m},{n},{seed},{scale})")))
}

/// A random record forced into C_1 at the origin ((beta_u, gamma_u) = 0
/// for u > m), then moved into general position.
pub fn c1_seeded(m: usize, n: usize, seed: u64, scale: f64) -> Result<EmbeddingMap> {
    let mut nf = random_record(m, n, seed)?;
    for u in 1..nf.codim() {
        nf.beta_u[u] = 0.0;
        nf.gamma_u[u] = c(0.0, 0.0);
    }
    let f = nf.to_embedding()?;
    Ok(perturb::random_general_position(&f, scale, seed)?.with_label(format!("c1_seeded({m},{n},{seed},{scale})")))
}

/// Graph embedding of a random record with every (beta_u, gamma_u) zero:
/// Webster class 0 at the origin.
pub fn degenerate(m: usize, n: usize, seed: u64) -> Result<EmbeddingMap> {
    let mut nf = random_record(m, n, seed)?;
    for u in 0..nf.codim() {
        nf.beta_u[u] = 0.0;
        nf.gamma_u[u] = c(0.0, 0.0);
    }
    Ok(nf.to_embedding()?.with_label(format!("degenerate({m},{n},{seed})")))
}
