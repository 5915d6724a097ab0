use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{OnlineInstance, Time};
use crate::world::{build_grid, VertexId};

/// Parameters of a seeded random grid instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub height: usize,
    pub width: usize,
    /// Fraction of cells to block; cells whose removal would disconnect the
    /// free region are skipped.
    pub density: f64,
    pub agents: usize,
    pub max_release: Time,
    pub seed: u64,
}

fn connected(height: usize, width: usize, blocked: &BTreeSet<(usize, usize)>) -> bool {
    let free: Vec<(usize, usize)> = (0..height)
        .flat_map(|r| (0..width).map(move |c| (r, c)))
        .filter(|cell| !blocked.contains(cell))
        .collect();
    let Some(&first) = free.first() else {
        return false;
    };
    let mut seen = BTreeSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some((r, c)) = queue.pop_front() {
        let next = [
            (r.wrapping_sub(1), c),
            (r + 1, c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
        ];
        for cell in next {
            if cell.0 < height && cell.1 < width && !blocked.contains(&cell) && seen.insert(cell) {
                queue.push_back(cell);
            }
        }
    }
    seen.len() == free.len()
}

pub fn gen_random(spec: &RandomSpec) -> Result<OnlineInstance> {
    if !(0.0..=1.0).contains(&spec.density) {
        return Err(Error::InvalidAgent(format!("density {} outside [0, 1]", spec.density)));
    }
    if spec.max_release < 0 {
        return Err(Error::InvalidAgent(format!("negative max release {}", spec.max_release)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let cells = spec.height * spec.width;
    let target = (spec.density * cells as f64).round() as usize;
    let mut order: Vec<(usize, usize)> = (0..spec.height)
        .flat_map(|r| (0..spec.width).map(move |c| (r, c)))
        .collect();
    order.shuffle(&mut rng);
    let mut blocked = BTreeSet::new();
    for cell in order {
        if blocked.len() >= target || cells - blocked.len() <= 2 {
            break;
        }
        blocked.insert(cell);
        if !connected(spec.height, spec.width, &blocked) {
            blocked.remove(&cell);
        }
    }
    let graph = build_grid(spec.height, spec.width, &blocked)?;
    let n = graph.vertex_count() as u32;
    if spec.agents > 0 && n < 2 {
        return Err(Error::InvalidAgent("fewer than two free cells".into()));
    }
    let triples = (0..spec.agents)
        .map(|_| {
            let s = rng.gen_range(0..n);
            let g = (s + rng.gen_range(1..n)) % n;
            (VertexId(s), VertexId(g), rng.gen_range(0..=spec.max_release))
        })
        .collect();
    OnlineInstance::from_unsorted(Arc::new(graph), triples)
}
