//! Multimode Fock space truncated by total photon number.
//!
//! Passive optics conserves the total, so the interferometer acts exactly on
//! this space; only the squeezed inputs are truncated.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;

use super::gates::BeamsplitBlocks;

type C64 = Complex<f64>;

#[derive(Debug)]
pub(crate) struct FockSpace {
    modes: usize,
    max_total: usize,
    /// `binom[m][k]`: tuples of length `m` with sum at most `k`.
    binom: Vec<Vec<usize>>,
    /// Occupations, `modes` bytes per state, lexicographic order.
    occ: Vec<u8>,
    /// Per ordered pair `(i, j)`, `i < j`: index groups `|…, s − t, …, t, …⟩`
    /// for `t = 0..=s`, concatenated; `s` is recovered from the group length.
    groups: Vec<Vec<u32>>,
    pub(crate) blocks: BeamsplitBlocks,
}

impl FockSpace {
    /// Shared instance per `(modes, max_total)`.
    pub(crate) fn cached(modes: usize, max_total: usize) -> Arc<FockSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<FockSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(s) = cache.lock().expect("space cache").get(&(modes, max_total)) {
            return s.clone();
        }
        let built = Arc::new(FockSpace::new(modes, max_total));
        cache
            .lock()
            .expect("space cache")
            .entry((modes, max_total))
            .or_insert(built)
            .clone()
    }

    pub(crate) fn new(modes: usize, max_total: usize) -> Self {
        let mut binom = vec![vec![1usize; max_total + 1]; modes + 1];
        for m in 1..=modes {
            for k in 0..=max_total {
                binom[m][k] = (0..=k).map(|v| binom[m - 1][k - v]).sum();
            }
        }
        let mut occ = Vec::with_capacity(binom[modes][max_total] * modes);
        let mut cur = vec![0u8; modes];
        enumerate(&mut cur, 0, max_total, &mut occ);
        let mut space = Self {
            modes,
            max_total,
            binom,
            occ,
            groups: Vec::new(),
            blocks: BeamsplitBlocks::new(max_total),
        };
        space.groups = (0..modes)
            .flat_map(|i| ((i + 1)..modes).map(move |j| (i, j)))
            .map(|(i, j)| space.pair_groups(i, j))
            .collect();
        space
    }

    pub(crate) fn dim(&self) -> usize {
        self.occ.len() / self.modes
    }

    pub(crate) fn modes(&self) -> usize {
        self.modes
    }

    pub(crate) fn max_total(&self) -> usize {
        self.max_total
    }

    pub(crate) fn occupation(&self, index: usize) -> &[u8] {
        &self.occ[index * self.modes..(index + 1) * self.modes]
    }

    pub(crate) fn rank(&self, occ: &[u8]) -> usize {
        let mut rank = 0;
        let mut remaining = self.max_total;
        for (i, &n) in occ.iter().enumerate() {
            let rest = self.modes - i - 1;
            for v in 0..n as usize {
                rank += self.binom[rest][remaining - v];
            }
            remaining -= n as usize;
        }
        rank
    }

    fn pair_slot(&self, i: usize, j: usize) -> usize {
        // Pairs are listed (0,1), (0,2), …, (1,2), …
        i * self.modes - i * (i + 1) / 2 + (j - i - 1)
    }

    fn pair_groups(&self, i: usize, j: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.dim());
        let mut probe = vec![0u8; self.modes];
        for idx in 0..self.dim() {
            let o = self.occupation(idx);
            if o[j] != 0 {
                continue;
            }
            let s = o[i];
            probe.copy_from_slice(o);
            for t in 0..=s {
                probe[i] = s - t;
                probe[j] = t;
                out.push(self.rank(&probe) as u32);
            }
        }
        out
    }

    /// Beam splitter between modes `a` and `b` (mode `a` plays the first mode).
    pub(crate) fn apply_beamsplitter(&self, amps: &mut [C64], a: usize, b: usize, gamma: f64, phi: f64) {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        let flipped = a > b;
        let blocks: Vec<_> = (0..=self.max_total).map(|s| self.blocks.block(s, gamma, phi)).collect();
        let groups = &self.groups[self.pair_slot(i, j)];
        let mut buf = Vec::with_capacity(self.max_total + 1);
        let mut pos = 0;
        while pos < groups.len() {
            let s = self.occupation(groups[pos] as usize)[i] as usize;
            let group = &groups[pos..pos + s + 1];
            pos += s + 1;
            if s == 0 {
                continue;
            }
            // Group slot g holds n_j = g; block index t holds n_b = t.
            let to_slot = |t: usize| if flipped { s - t } else { t };
            buf.clear();
            buf.extend((0..=s).map(|t| amps[group[to_slot(t)] as usize]));
            let u = &blocks[s];
            for t_out in 0..=s {
                let mut acc = C64::from(0.0);
                for (t_in, z) in buf.iter().enumerate() {
                    acc += u[(t_out, t_in)] * z;
                }
                amps[group[to_slot(t_out)] as usize] = acc;
            }
        }
    }
}

fn enumerate(cur: &mut Vec<u8>, pos: usize, remaining: usize, out: &mut Vec<u8>) {
    if pos == cur.len() {
        out.extend_from_slice(cur);
        return;
    }
    for v in 0..=remaining {
        cur[pos] = v as u8;
        enumerate(cur, pos + 1, remaining - v, out);
    }
    cur[pos] = 0;
}
