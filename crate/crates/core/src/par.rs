//! Data-parallel helpers with a sequential fallback.
//!
//! Every parallel path in the crate goes through [`map_indexed`], which
//! always returns results in input order. Reductions are performed by the
//! caller on the ordered output, so results do not depend on scheduling.

use serde::{Deserialize, Serialize};

/// How independent work items are executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled; otherwise
    /// identical to `Sequential`.
    #[default]
    Parallel,
}

impl Schedule {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Schedule::Parallel
    }
}

/// Map `f` over `items`, preserving order.
pub fn map_indexed<T, U, F>(schedule: Schedule, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if schedule.is_parallel() && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect();
    }
    let _ = schedule;
    items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
}
