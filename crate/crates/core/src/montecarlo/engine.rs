use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream of path `id`: the seed picks the key, the path id the
/// stream, so each path sees the same numbers however work is split.
fn path_rng(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Runs `f` on paths `0..n` one after another.
pub fn map_paths_sequential<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    F: Fn(u64, &mut ChaCha8Rng) -> T,
{
    (0..n as u64).map(|id| f(id, &mut path_rng(seed, id))).collect()
}

/// Runs `f` on paths `0..n` across the rayon pool; output order and values
/// match [`map_paths_sequential`].
#[cfg(feature = "parallel")]
pub fn map_paths_parallel<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
{
    use rayon::prelude::*;
    (0..n as u64).into_par_iter().map(|id| f(id, &mut path_rng(seed, id))).collect()
}

/// Parallel when the `parallel` feature is on, sequential otherwise.
pub fn map_paths<T, F>(n: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        map_paths_parallel(n, seed, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_paths_sequential(n, seed, f)
    }
}
