use crate::error::{Error, Result};
use crate::law::FitnessLaw;
use std::fmt;

const INITIAL_BUCKETS: usize = 64;
// Rebuild onto a 4x finer grid once average occupancy passes this.
const TARGET_OCCUPANCY: u64 = 1024;
const GROWTH: usize = 4;
const MAX_BUCKETS: usize = 1 << 22;

/// Ordered multiset of fitness values with logarithmic minimum extraction
/// and open-interval rank counts.
///
/// Values are grouped into buckets by quantile: the law's cdf maps each
/// value into [0, 1], which is cut into a power-of-two number of equal
/// slices, and a 64-ary occupancy index answers prefix counts and tracks
/// the lowest occupied bucket.
/// The index stays a few megabytes even for populations of tens of
/// millions, so the hot path (insert / remove-min) touches cache-resident
/// memory plus one bucket slot, where a pointer-based balanced tree would
/// take a cache miss per level. Bucket contents live in one shared arena
/// (separate per-bucket allocations scatter across the heap and stall on
/// page walks once the population passes a few million). The grid rebuilds
/// onto a 4x finer slicing as the population grows, keeping expected bucket
/// occupancy bounded for samples drawn from the law.
///
/// Ordering across buckets follows from the cdf being nondecreasing; within
/// a bucket, values are compared directly, so all queries are exact for any
/// value layout, including ties and atoms. Buckets keep insertion order
/// (append on insert, shift on remove; grid refinement nests buckets
/// exactly because the slice count scales by powers of two), which resolves
/// ties on removal oldest-first.
pub struct Population {
    law: FitnessLaw,
    buckets: BucketArena,
    tree: OccupancyIndex,
    len: u64,
}

const TAIL_SLOTS: usize = 16;

/// Bucketed storage in two tiers. Fresh values land in a fixed-width tail
/// slab (`TAIL_SLOTS` per bucket, one compact allocation), which flushes
/// into the bucket's contiguous body slice once full — so only one insert
/// in `TAIL_SLOTS` touches the big body arena, whose random-access cost
/// dominates at multi-million populations. Bodies share a single flat allocation;
/// overflowing bodies relocate to its end, and the arena compacts once
/// relocation holes exceed half of it.
///
/// A bucket's logical content is body slice (older) followed by tail slice
/// (newer), each in insertion order.
struct BucketArena {
    data: Vec<f64>,
    start: Vec<u64>,
    len: Vec<u32>,
    cap: Vec<u32>,
    tails: Vec<f64>,
    tail_len: Vec<u8>,
    holes: u64,
}

impl BucketArena {
    fn new(bucket_count: usize) -> Self {
        BucketArena {
            data: Vec::new(),
            start: vec![0; bucket_count],
            len: vec![0; bucket_count],
            cap: vec![0; bucket_count],
            tails: vec![0.0; bucket_count * TAIL_SLOTS],
            tail_len: vec![0; bucket_count],
            holes: 0,
        }
    }

    /// Fresh arena with per-bucket body capacity for the given sizes plus a
    /// little slack each.
    fn with_sizes(sizes: &[u32]) -> Self {
        let count = sizes.len();
        let mut start = Vec::with_capacity(count);
        let mut cap = Vec::with_capacity(count);
        let mut at = 0u64;
        for &s in sizes {
            let c = s + (s / 8).max(TAIL_SLOTS as u32);
            start.push(at);
            cap.push(c);
            at += c as u64;
        }
        BucketArena {
            data: vec![0.0; at as usize],
            start,
            len: vec![0; count],
            cap,
            tails: vec![0.0; count * TAIL_SLOTS],
            tail_len: vec![0; count],
            holes: 0,
        }
    }

    fn bucket_count(&self) -> usize {
        self.len.len()
    }

    /// Older (body) and newer (tail) parts of bucket `b`.
    #[inline]
    fn slices(&self, b: usize) -> (&[f64], &[f64]) {
        let s = self.start[b] as usize;
        (
            &self.data[s..s + self.len[b] as usize],
            &self.tails[b * TAIL_SLOTS..b * TAIL_SLOTS + self.tail_len[b] as usize],
        )
    }

    #[inline]
    fn bucket_len(&self, b: usize) -> usize {
        self.len[b] as usize + self.tail_len[b] as usize
    }

    #[inline]
    fn push(&mut self, b: usize, value: f64) {
        let t = self.tail_len[b] as usize;
        if t == TAIL_SLOTS {
            self.flush(b);
            self.tails[b * TAIL_SLOTS] = value;
            self.tail_len[b] = 1;
        } else {
            self.tails[b * TAIL_SLOTS + t] = value;
            self.tail_len[b] = t as u8 + 1;
        }
    }

    /// Append bucket `b`'s tail to its body.
    fn flush(&mut self, b: usize) {
        let t = self.tail_len[b] as usize;
        if self.len[b] as usize + t > self.cap[b] as usize {
            self.relocate(b);
        }
        let dst = self.start[b] as usize + self.len[b] as usize;
        self.data[dst..dst + t].copy_from_slice(&self.tails[b * TAIL_SLOTS..b * TAIL_SLOTS + t]);
        self.len[b] += t as u32;
        self.tail_len[b] = 0;
    }

    #[cold]
    fn relocate(&mut self, b: usize) {
        let new_cap = (self.cap[b] * 2).max(2 * TAIL_SLOTS as u32);
        let old_start = self.start[b] as usize;
        let old_len = self.len[b] as usize;
        let new_start = self.data.len();
        self.data.reserve(new_cap as usize);
        self.data.extend_from_within(old_start..old_start + old_len);
        self.data.resize(new_start + new_cap as usize, 0.0);
        self.start[b] = new_start as u64;
        self.holes += self.cap[b] as u64;
        self.cap[b] = new_cap;
        if self.holes > self.data.len() as u64 / 2 {
            self.compact();
        }
    }

    fn compact(&mut self) {
        let count = self.bucket_count();
        let mut at = 0u64;
        let mut data = Vec::new();
        let mut starts = Vec::with_capacity(count);
        let mut caps = Vec::with_capacity(count);
        for b in 0..count {
            let len = self.len[b];
            let cap = len + (len / 8).max(TAIL_SLOTS as u32);
            starts.push(at);
            caps.push(cap);
            at += cap as u64;
        }
        data.resize(at as usize, 0.0);
        for (b, &dst) in starts.iter().enumerate() {
            let src = self.start[b] as usize;
            let dst = dst as usize;
            let len = self.len[b] as usize;
            data[dst..dst + len].copy_from_slice(&self.data[src..src + len]);
        }
        self.data = data;
        self.start = starts;
        self.cap = caps;
        self.holes = 0;
    }

    /// Remove the element at logical index `idx` of bucket `b` (body first,
    /// then tail), preserving order.
    #[inline]
    fn remove(&mut self, b: usize, idx: usize) -> f64 {
        let body_len = self.len[b] as usize;
        self.live -= 1;
        if idx < body_len {
            let s = self.start[b] as usize;
            let value = self.data[s + idx];
            self.data.copy_within(s + idx + 1..s + body_len, s + idx);
            self.len[b] -= 1;
            value
        } else {
            let t = b * TAIL_SLOTS;
            let tail_len = self.tail_len[b] as usize;
            let at = t + (idx - body_len);
            let value = self.tails[at];
            self.tails.copy_within(at + 1..t + tail_len, at);
            self.tail_len[b] -= 1;
            value
        }
    }

    fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.bucket_count()).flat_map(|b| {
            let (body, tail) = self.slices(b);
            body.iter().chain(tail.iter()).copied()
        })
    }
}

impl Population {
    pub fn new(law: FitnessLaw) -> Self {
        Self::with_expected_len(law, 0)
    }

    /// Like `new`, but sized so a population around `expected_len` needs no
    /// grid rebuilds on the way up.
    pub fn with_expected_len(law: FitnessLaw, expected_len: u64) -> Self {
        let mut want = INITIAL_BUCKETS;
        while (want as u64) * TARGET_OCCUPANCY < expected_len && want < MAX_BUCKETS {
            want *= GROWTH;
        }
        Population {
            law,
            buckets: BucketArena::new(want),
            tree: OccupancyIndex::new(want),
            len: 0,
        }
    }

    pub fn law(&self) -> FitnessLaw {
        self.law
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    fn bucket_index(law: FitnessLaw, count: usize, value: f64) -> usize {
        let u = law.cdf(value);
        ((u * count as f64) as usize).min(count - 1)
    }

    #[inline]
    pub fn insert(&mut self, value: f64) {
        debug_assert!(value.is_finite(), "fitness must be finite, got {value}");
        let b = Self::bucket_index(self.law, self.buckets.bucket_count(), value);
        self.buckets.push(b, value);
        self.tree.inc(b);
        self.len += 1;
        if self.len > TARGET_OCCUPANCY * self.buckets.bucket_count() as u64
            && self.buckets.bucket_count() < MAX_BUCKETS
        {
            self.grow();
        }
    }

    /// Remove and return the smallest stored value; ties resolve to the
    /// oldest insertion.
    #[inline]
    pub fn remove_min(&mut self) -> Option<f64> {
        let b = self.first_occupied_bucket()?;
        let (body, tail) = self.buckets.slices(b);
        let idx = first_min_position(body, tail);
        let value = self.buckets.remove(b, idx);
        self.tree.dec(b);
        self.len -= 1;
        Some(value)
    }

    /// Smallest stored value without removing it.
    pub fn min(&self) -> Option<f64> {
        let b = self.first_occupied_bucket()?;
        let (body, tail) = self.buckets.slices(b);
        let idx = first_min_position(body, tail);
        Some(if idx < body.len() {
            body[idx]
        } else {
            tail[idx - body.len()]
        })
    }

    fn first_occupied_bucket(&self) -> Option<usize> {
        if self.len == 0 {
            return None;
        }
        let b = self.tree.min_bucket();
        debug_assert!(self.buckets.bucket_len(b) > 0);
        Some(b)
    }

    /// Number of stored values strictly inside the open interval (a, b).
    /// Accepts infinite endpoints; rejects NaN and a > b.
    pub fn count_in(&self, a: f64, b: f64) -> Result<u64> {
        if a.is_nan() || b.is_nan() || a > b {
            return Err(Error::InvalidInterval(a, b));
        }
        Ok(self.count_before(b, false) - self.count_before(a, true))
    }

    /// Number of stored values strictly below `x`.
    pub fn count_below(&self, x: f64) -> u64 {
        self.count_before(x, false)
    }

    /// Multiplicity of the exact value `x`.
    pub fn count_eq(&self, x: f64) -> u64 {
        self.count_before(x, true) - self.count_before(x, false)
    }

    fn count_before(&self, x: f64, inclusive: bool) -> u64 {
        if x == f64::INFINITY {
            return self.len;
        }
        if x == f64::NEG_INFINITY {
            return 0;
        }
        let b = Self::bucket_index(self.law, self.buckets.bucket_count(), x);
        let mut n = self.tree.prefix(b);
        let (body, tail) = self.buckets.slices(b);
        for &v in body.iter().chain(tail) {
            if v < x || (inclusive && v == x) {
                n += 1;
            }
        }
        n
    }

    /// All stored values, in no particular order.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.buckets.iter()
    }

    fn grow(&mut self) {
        let new_count = (self.buckets.bucket_count() * GROWTH).min(MAX_BUCKETS);
        let old = std::mem::replace(&mut self.buckets, BucketArena::new(0));
        let mut sizes = vec![0u32; new_count];
        for v in old.iter() {
            sizes[Self::bucket_index(self.law, new_count, v)] += 1;
        }
        let mut buckets = BucketArena::with_sizes(&sizes);
        // refinement nests: each old bucket splits into GROWTH consecutive
        // new ones, so appending in old order preserves insertion order
        for v in old.iter() {
            buckets.push(Self::bucket_index(self.law, new_count, v), v);
        }
        self.tree = OccupancyIndex::from_counts(&sizes);
        self.buckets = buckets;
    }
}

/// Logical index of the smallest value in body ++ tail; the first
/// occurrence wins, so ties resolve oldest-first.
#[inline]
fn first_min_position(body: &[f64], tail: &[f64]) -> usize {
    debug_assert!(!body.is_empty() || !tail.is_empty());
    let mut best = 0;
    let mut best_value = f64::INFINITY;
    for (i, &v) in body.iter().chain(tail).enumerate() {
        if v < best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

impl fmt::Debug for Population {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Population")
            .field("law", &self.law)
            .field("len", &self.len)
            .field("buckets", &self.buckets.bucket_count())
            .finish()
    }
}

/// Occupancy index over buckets: a 64-ary tree of partial counts plus a
/// cursor on the lowest occupied bucket. Updates touch one cell per level
/// (at most four levels at the bucket cap), prefix queries sum at most 63
/// cells per level, and the cursor advance after emptying a bucket skips
/// whole empty subtrees — so minimum extraction and interval counts stay
/// logarithmic in the bucket count.
struct OccupancyIndex {
    counts: Vec<u32>,
    /// sums[l][i] covers buckets [i * 64^(l+1), (i+1) * 64^(l+1)).
    sums: Vec<Vec<u64>>,
    lowest: usize,
}

const FANOUT: usize = 64;

impl OccupancyIndex {
    fn new(n: usize) -> Self {
        let mut sums = Vec::new();
        let mut width = n.div_ceil(FANOUT);
        while width >= 1 {
            sums.push(vec![0u64; width]);
            if width == 1 {
                break;
            }
            width = width.div_ceil(FANOUT);
        }
        OccupancyIndex {
            counts: vec![0; n],
            sums,
            lowest: n,
        }
    }

    fn from_counts(counts: &[u32]) -> Self {
        let mut idx = Self::new(counts.len());
        idx.counts = counts.to_vec();
        for (i, &c) in counts.iter().enumerate() {
            let mut cell = i / FANOUT;
            for level in &mut idx.sums {
                level[cell] += c as u64;
                cell /= FANOUT;
            }
        }
        idx.lowest = idx
            .counts
            .iter()
            .position(|&c| c > 0)
            .unwrap_or(counts.len());
        idx
    }

    #[inline]
    fn inc(&mut self, bucket: usize) {
        self.counts[bucket] += 1;
        let mut cell = bucket / FANOUT;
        for level in &mut self.sums {
            level[cell] += 1;
            cell /= FANOUT;
        }
        if bucket < self.lowest {
            self.lowest = bucket;
        }
    }

    /// Remove one element from `bucket`; callers only ever drain the lowest
    /// occupied bucket, so the cursor never has to move backwards here.
    #[inline]
    fn dec(&mut self, bucket: usize) {
        debug_assert_eq!(bucket, self.lowest);
        self.counts[bucket] -= 1;
        let mut cell = bucket / FANOUT;
        for level in &mut self.sums {
            level[cell] -= 1;
            cell /= FANOUT;
        }
        if self.counts[bucket] == 0 {
            self.advance_lowest();
        }
    }

    /// Move the cursor to the next occupied bucket: climb while the rest of
    /// the current 64-cell group is empty, then descend into the first
    /// occupied subtree.
    #[cold]
    fn advance_lowest(&mut self) {
        let start = self.lowest;
        if let Some(b) = scan_nonzero_u32(&self.counts, start + 1) {
            self.lowest = b;
            return;
        }
        let mut cell = start / FANOUT;
        for (l, level) in self.sums.iter().enumerate() {
            match scan_nonzero_u64(level, cell + 1) {
                Some(found) => {
                    self.lowest = self.descend(l, found);
                    return;
                }
                None => cell /= FANOUT,
            }
        }
        self.lowest = self.counts.len();
    }

    /// First occupied bucket inside the subtree rooted at `cell` of level
    /// `l` (levels index `sums`; their children live one level down).
    fn descend(&self, l: usize, cell: usize) -> usize {
        debug_assert!(self.sums[l][cell] > 0);
        let mut cell = cell;
        for l in (1..=l).rev() {
            let child = cell * FANOUT;
            cell = scan_nonzero_u64(&self.sums[l - 1][..(child + FANOUT).min(self.sums[l - 1].len())], child)
                .expect("nonempty parent cell");
        }
        let child = cell * FANOUT;
        scan_nonzero_u32(&self.counts[..(child + FANOUT).min(self.counts.len())], child)
            .expect("nonempty leaf cell")
    }

    /// Lowest occupied bucket; only meaningful while any count is nonzero.
    #[inline]
    fn min_bucket(&self) -> usize {
        self.lowest
    }

    /// Total count in buckets 0..bucket (exclusive): at every level, add
    /// the cells between the enclosing group boundary and the path.
    fn prefix(&self, bucket: usize) -> u64 {
        let mut s: u64 = self.counts[(bucket & !(FANOUT - 1))..bucket]
            .iter()
            .map(|&c| c as u64)
            .sum();
        let mut cell = bucket / FANOUT;
        for level in &self.sums {
            s += level[(cell & !(FANOUT - 1))..cell].iter().sum::<u64>();
            cell /= FANOUT;
        }
        s
    }
}

/// Index of the first nonzero entry at or after `from`, scanning only the
/// 64-aligned group containing `from`.
#[inline]
fn scan_nonzero_u32(cells: &[u32], from: usize) -> Option<usize> {
    let end = ((from & !(FANOUT - 1)) + FANOUT).min(cells.len());
    cells[from.min(end)..end]
        .iter()
        .position(|&c| c > 0)
        .map(|i| from + i)
}

#[inline]
fn scan_nonzero_u64(cells: &[u64], from: usize) -> Option<usize> {
    let end = ((from & !(FANOUT - 1)) + FANOUT).min(cells.len());
    cells[from.min(end)..end]
        .iter()
        .position(|&c| c > 0)
        .map(|i| from + i)
}
