//! Fixtures shared by the benchmarks.

use polymatrix_core::experiments::{draw_game, GameFamily};
use polymatrix_core::{Dataset, NoiseModel, ObservationModel, PolymatrixGame};

/// Random game with at least one equilibrium and a sample drawn from it.
pub fn learning_case(p: usize, d: usize, n: usize, seed: u64) -> (PolymatrixGame, Dataset) {
    let (game, _) = draw_game(&GameFamily::random(p, d, 3), seed).expect("game");
    let data = ObservationModel::new(&game, NoiseModel::local_uniform(p, 0.7))
        .expect("noise model")
        .sample(n, seed)
        .expect("sample");
    (game, data)
}
