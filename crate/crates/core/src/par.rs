//! Replica-level data parallelism.
//!
//! With the `parallel` feature the map runs on the rayon pool; without it, or
//! with [`Execution::Sequential`], it is a plain loop. Output order always
//! follows the index, so results do not depend on the pool size.

/// How an indexed batch is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when parallel execution is actually available in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Runs `f` inside a pool with `threads` workers when parallelism is built in.
///
/// `threads == 0` means the global default pool.
pub fn with_threads<R: Send, F: FnOnce() -> R + Send>(threads: usize, f: F) -> R {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_deterministic() {
        let a = map_indexed(100, Execution::Parallel, |i| i * i);
        let b = map_indexed(100, Execution::Sequential, |i| i * i);
        assert_eq!(a, b);
        assert_eq!(
            with_threads(2, || map_indexed(5, Execution::Parallel, |i| i)),
            vec![0, 1, 2, 3, 4]
        );
    }
}
