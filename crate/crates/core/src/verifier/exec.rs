//! Index-ordered map over trials, either on the calling thread or on a
//! rayon pool. Results always come back in index order, so reports do not
//! depend on the degree of parallelism.

use std::fmt;
#[cfg(feature = "parallel")]
use std::sync::Arc;

use crate::error::Result;

#[derive(Clone)]
pub struct Executor {
    #[cfg(feature = "parallel")]
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl Executor {
    pub fn sequential() -> Self {
        Self {
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    /// A pool with `jobs` threads (all cores when `None`). Without the
    /// `parallel` feature this is the sequential executor.
    #[cfg_attr(not(feature = "parallel"), allow(unused_variables))]
    pub fn parallel(jobs: Option<usize>) -> Result<Self> {
        #[cfg(feature = "parallel")]
        {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = jobs {
                builder = builder.num_threads(n.max(1));
            }
            let pool = builder
                .build()
                .map_err(|e| crate::error::Error::config(format!("cannot start thread pool: {e}")))?;
            Ok(Self {
                pool: Some(Arc::new(pool)),
            })
        }
        #[cfg(not(feature = "parallel"))]
        {
            Ok(Self::sequential())
        }
    }

    /// `jobs == Some(1)` is sequential; anything else is parallel.
    pub fn with_jobs(jobs: Option<usize>) -> Result<Self> {
        match jobs {
            Some(1) => Ok(Self::sequential()),
            _ => Self::parallel(jobs),
        }
    }

    pub fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }

    pub fn map<T, F>(&self, range: std::ops::Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| range.into_par_iter().map(&f).collect());
        }
        range.map(f).collect()
    }
}

impl Default for Executor {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Self::parallel(None).unwrap_or_else(|_| Self::sequential())
        }
        #[cfg(not(feature = "parallel"))]
        {
            Self::sequential()
        }
    }
}

impl fmt::Debug for Executor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_parallel() { "Executor(parallel)" } else { "Executor(sequential)" })
    }
}
