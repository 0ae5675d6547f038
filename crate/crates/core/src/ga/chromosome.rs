use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::SdmsopInstance;

/// GA genotype. `arrangement` holds the one-based genes `1..=k+m-1` where
/// `k` is the cluster count including the depot; genes above `k` separate
/// the travelers. `membership[i]` belongs to the gene at position `i` and
/// travels with it under mutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chromosome {
    pub arrangement: Vec<usize>,
    pub membership: Vec<bool>,
}

impl Chromosome {
    pub fn gene_count(inst: &SdmsopInstance) -> usize {
        inst.cluster_count() + inst.travelers() - 1
    }

    pub fn random(inst: &SdmsopInstance, one_rate: f64, rng: &mut impl Rng) -> Self {
        let len = Self::gene_count(inst);
        let mut arrangement: Vec<usize> = (1..=len).collect();
        arrangement.shuffle(rng);
        let membership = (0..len).map(|_| rng.gen_bool(one_rate)).collect();
        Self {
            arrangement,
            membership,
        }
    }

    /// Permutation of `1..=k+m-1` with matching membership length.
    pub fn is_well_formed(&self, inst: &SdmsopInstance) -> bool {
        let len = Self::gene_count(inst);
        if self.arrangement.len() != len || self.membership.len() != len {
            return false;
        }
        let mut seen = vec![false; len + 1];
        self.arrangement.iter().all(|&g| {
            (1..=len).contains(&g) && !std::mem::replace(&mut seen[g], true)
        })
    }
}

/// Splits at separators; drops the depot gene and genes whose membership
/// bit is clear. Returns zero-based cluster sequences, one per traveler.
pub fn decode(c: &Chromosome, inst: &SdmsopInstance) -> Vec<Vec<usize>> {
    let k = inst.cluster_count();
    let mut routes = vec![Vec::new(); inst.travelers()];
    let mut t = 0;
    for (&g, &bit) in c.arrangement.iter().zip(&c.membership) {
        if g > k {
            t += 1;
        } else if g != 1 && bit {
            routes[t].push(g - 1);
        }
    }
    debug_assert_eq!(t + 1, inst.travelers(), "separator count must equal m - 1");
    routes
}

/// Region crossover with a random half-open region `[a, b)` of `c1`.
pub fn crossover(c1: &Chromosome, c2: &Chromosome, rng: &mut impl Rng) -> Chromosome {
    let len = c1.arrangement.len();
    let mut a = rng.gen_range(0..=len);
    let mut b = rng.gen_range(0..=len);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    crossover_region(c1, c2, a, b)
}

/// The child keeps `c2`'s gene order, except that the genes of
/// `c1[a..b]` are pulled out and reinserted as `c1`'s contiguous block
/// at the spot where `c2` first reaches one of them. Membership follows
/// the gene: region genes carry `c1`'s bit, the rest carry `c2`'s.
pub fn crossover_region(c1: &Chromosome, c2: &Chromosome, a: usize, b: usize) -> Chromosome {
    let len = c1.arrangement.len();
    let region = &c1.arrangement[a..b];
    let mut in_region = vec![false; len + 1];
    for &g in region {
        in_region[g] = true;
    }
    let mut arrangement = Vec::with_capacity(len);
    let mut membership = Vec::with_capacity(len);
    let mut placed = false;
    for (&g, &bit) in c2.arrangement.iter().zip(&c2.membership) {
        if in_region[g] {
            if !placed {
                arrangement.extend_from_slice(region);
                membership.extend_from_slice(&c1.membership[a..b]);
                placed = true;
            }
        } else {
            arrangement.push(g);
            membership.push(bit);
        }
    }
    Chromosome {
        arrangement,
        membership,
    }
}

/// Per-position swap with a uniformly chosen other position, then per-bit
/// flip, each with probability `rate`.
pub fn mutate(c: &mut Chromosome, rate: f64, rng: &mut impl Rng) {
    let len = c.arrangement.len();
    if len >= 2 {
        for i in 0..len {
            if rng.gen::<f64>() < rate {
                let mut j = rng.gen_range(0..len - 1);
                if j >= i {
                    j += 1;
                }
                c.arrangement.swap(i, j);
                c.membership.swap(i, j);
            }
        }
    }
    for bit in &mut c.membership {
        if rng.gen::<f64>() < rate {
            *bit = !*bit;
        }
    }
}
