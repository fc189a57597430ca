//! Attention/working memory.
//!
//! Propositions are written along a random walk through a cubic torus of
//! loci. Retrieval searches a sphere around the current pointer; whatever
//! lies inside the sphere is salient, everything else is effectively
//! forgotten until the walk brings the pointer back near it.
//!
//! Distances are Euclidean over per-axis toroidal displacements, so the
//! unit shell around a locus is exactly its six axis neighbours and the
//! largest distance on a 16-cube is `8 * sqrt(3)`.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;

use crate::symbols::{AgentId, ItemId, PutAct};

pub const DEFAULT_MEMORY_SIZE: i32 = 16;

/// A cell coordinate on the torus, always reduced into `[0, size)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Locus {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Locus {
    pub const ORIGIN: Locus = Locus { x: 0, y: 0, z: 0 };

    pub fn new(x: i32, y: i32, z: i32, size: i32) -> Locus {
        Locus { x: x.rem_euclid(size), y: y.rem_euclid(size), z: z.rem_euclid(size) }
    }

    fn offset(self, dx: i32, dy: i32, dz: i32, size: i32) -> Locus {
        Locus::new(self.x + dx, self.y + dy, self.z + dz, size)
    }
}

const AXIS_STEPS: [(i32, i32, i32); 6] = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)];

fn axis_displacement(a: i32, b: i32, size: i32) -> i32 {
    let d = (a - b).rem_euclid(size);
    d.min(size - d)
}

/// Squared toroidal distance. Integer valued, so radius tests are exact.
pub fn torus_distance_sq(a: Locus, b: Locus, size: i32) -> i32 {
    let dx = axis_displacement(a.x, b.x, size);
    let dy = axis_displacement(a.y, b.y, size);
    let dz = axis_displacement(a.z, b.z, size);
    dx * dx + dy * dy + dz * dz
}

pub fn torus_distance(a: Locus, b: Locus, size: i32) -> f64 {
    f64::from(torus_distance_sq(a, b, size)).sqrt()
}

/// Every locus within `radius` of `center`, center included.
pub fn salient_loci(center: Locus, radius: u32, size: i32) -> BTreeSet<Locus> {
    let r2 = i64::from(radius) * i64::from(radius);
    let mut out = BTreeSet::new();
    for x in 0..size {
        for y in 0..size {
            for z in 0..size {
                let l = Locus { x, y, z };
                if i64::from(torus_distance_sq(center, l, size)) <= r2 {
                    out.insert(l);
                }
            }
        }
    }
    out
}

/// Cumulative count of loci by squared distance from any fixed locus.
///
/// `table[d2]` is the number of loci at squared distance `<= d2`. The torus
/// is homogeneous, so one table serves every center.
fn shell_table(size: i32) -> Vec<usize> {
    let max_axis = size / 2;
    let max_d2 = (3 * max_axis * max_axis) as usize;
    let mut hist = vec![0usize; max_d2 + 1];
    for x in 0..size {
        for y in 0..size {
            for z in 0..size {
                let d2 = torus_distance_sq(Locus::ORIGIN, Locus { x, y, z }, size);
                hist[d2 as usize] += 1;
            }
        }
    }
    let mut acc = 0;
    for slot in hist.iter_mut() {
        acc += *slot;
        *slot = acc;
    }
    hist
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predicate {
    Has,
    NotHas,
    Score,
    Put,
    Close,
    Agreed,
}

/// A belief, intention or utterance content as stored in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Proposition {
    Has { agent: AgentId, item: ItemId },
    NotHas { agent: AgentId, item: ItemId },
    Score { item: ItemId, points: u32 },
    Put(PutAct),
    Close(PutAct),
    Agreed(PutAct),
}

impl Proposition {
    pub fn predicate(&self) -> Predicate {
        match self {
            Proposition::Has { .. } => Predicate::Has,
            Proposition::NotHas { .. } => Predicate::NotHas,
            Proposition::Score { .. } => Predicate::Score,
            Proposition::Put(_) => Predicate::Put,
            Proposition::Close(_) => Predicate::Close,
            Proposition::Agreed(_) => Predicate::Agreed,
        }
    }

    fn agent(&self) -> Option<AgentId> {
        match self {
            Proposition::Has { agent, .. } | Proposition::NotHas { agent, .. } => Some(*agent),
            Proposition::Score { .. } => None,
            Proposition::Put(act) | Proposition::Close(act) | Proposition::Agreed(act) => Some(act.actor),
        }
    }

    fn item(&self) -> ItemId {
        match self {
            Proposition::Has { item, .. } | Proposition::NotHas { item, .. } | Proposition::Score { item, .. } => *item,
            Proposition::Put(act) | Proposition::Close(act) | Proposition::Agreed(act) => act.item,
        }
    }
}

/// A predicate with optional (wildcard when `None`) agent and item slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pattern {
    pub predicate: Predicate,
    pub agent: Option<AgentId>,
    pub item: Option<ItemId>,
}

impl Pattern {
    pub fn any(predicate: Predicate) -> Pattern {
        Pattern { predicate, agent: None, item: None }
    }

    pub fn has(agent: AgentId) -> Pattern {
        Pattern { predicate: Predicate::Has, agent: Some(agent), item: None }
    }

    pub fn not_has(agent: AgentId) -> Pattern {
        Pattern { predicate: Predicate::NotHas, agent: Some(agent), item: None }
    }

    pub fn score(item: ItemId) -> Pattern {
        Pattern { predicate: Predicate::Score, agent: None, item: Some(item) }
    }

    pub fn exact(p: &Proposition) -> Pattern {
        Pattern { predicate: p.predicate(), agent: p.agent(), item: Some(p.item()) }
    }

    pub fn matches(&self, p: &Proposition) -> bool {
        p.predicate() == self.predicate
            && self.agent.is_none_or(|a| p.agent() == Some(a))
            && self.item.is_none_or(|i| p.item() == i)
    }
}

/// Result of one memory search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retrieval {
    /// Matching copies, nearest first, then oldest first.
    pub matches: Vec<Proposition>,
    /// Loci inside the search sphere: the unit of retrieval cost.
    pub probes: u64,
}

#[derive(Debug, Clone)]
pub struct MemoryStore {
    size: i32,
    cells: HashMap<Locus, Vec<Proposition>>,
    pointer: Locus,
    chronology: Vec<(Locus, Proposition)>,
    shells: Vec<usize>,
}

impl Default for MemoryStore {
    fn default() -> Self {
        MemoryStore::new(DEFAULT_MEMORY_SIZE)
    }
}

impl MemoryStore {
    /// Empty memory of `size`³ loci with the pointer at the origin.
    ///
    /// Panics if `size < 2`.
    pub fn new(size: i32) -> MemoryStore {
        assert!(size >= 2, "memory size must be at least 2, got {size}");
        MemoryStore {
            size,
            cells: HashMap::new(),
            pointer: Locus::ORIGIN,
            chronology: Vec::new(),
            shells: shell_table(size),
        }
    }

    pub fn size(&self) -> i32 {
        self.size
    }

    pub fn pointer(&self) -> Locus {
        self.pointer
    }

    pub fn chronology(&self) -> &[(Locus, Proposition)] {
        &self.chronology
    }

    pub fn cell(&self, locus: Locus) -> &[Proposition] {
        self.cells.get(&locus).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.chronology.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chronology.is_empty()
    }

    /// Number of loci within `radius` of any locus.
    pub fn sphere_size(&self, radius: u32) -> u64 {
        let r2 = (radius as usize).saturating_mul(radius as usize);
        let idx = r2.min(self.shells.len() - 1);
        self.shells[idx] as u64
    }

    /// Write `p` at the pointer, then step the pointer to a uniformly chosen
    /// axis neighbour.
    pub fn store<R: Rng + ?Sized>(&mut self, p: Proposition, rng: &mut R) {
        self.cells.entry(self.pointer).or_default().push(p);
        self.chronology.push((self.pointer, p));
        let (dx, dy, dz) = AXIS_STEPS[rng.random_range(0..AXIS_STEPS.len())];
        self.pointer = self.pointer.offset(dx, dy, dz, self.size);
    }

    pub fn retrieve(&self, pattern: &Pattern, radius: u32) -> Retrieval {
        let r2 = i64::from(radius) * i64::from(radius);
        // Scanning the chronology visits exactly the stored copies; that is
        // the same set as walking the sphere's cells, and much cheaper.
        let mut hits: Vec<(i32, usize, Proposition)> = self
            .chronology
            .iter()
            .enumerate()
            .filter(|(_, (_, p))| pattern.matches(p))
            .filter_map(|(i, (locus, p))| {
                let d2 = torus_distance_sq(self.pointer, *locus, self.size);
                (i64::from(d2) <= r2).then_some((d2, i, *p))
            })
            .collect();
        hits.sort_unstable_by_key(|&(d2, i, _)| (d2, i));
        Retrieval { matches: hits.into_iter().map(|(_, _, p)| p).collect(), probes: self.sphere_size(radius) }
    }

    pub fn is_salient(&self, pattern: &Pattern, radius: u32) -> (bool, u64) {
        let r = self.retrieve(pattern, radius);
        (!r.matches.is_empty(), r.probes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn has(item: u16) -> Proposition {
        Proposition::Has { agent: AgentId::A, item: ItemId(item) }
    }

    #[test]
    fn distances() {
        let o = Locus::ORIGIN;
        assert_eq!(torus_distance(o, Locus::new(0, 1, 0, 16), 16), 1.0);
        assert_eq!(torus_distance(o, o, 16), 0.0);
        assert_eq!(torus_distance(o, Locus::new(15, 0, 0, 16), 16), 1.0);
        assert_eq!(Locus::new(-1, 16, 33, 16), Locus { x: 15, y: 0, z: 1 });
    }

    #[test]
    fn max_distance_brute_force() {
        // Homogeneous torus: fixing one endpoint at the origin covers every pair.
        let mut max: f64 = 0.0;
        for l in salient_loci(Locus::ORIGIN, 100, 16) {
            max = max.max(torus_distance(Locus::ORIGIN, l, 16));
        }
        assert!((max - 8.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((max - 13.856).abs() < 1e-3);
    }

    #[test]
    fn unit_sphere_is_center_and_axis_neighbours() {
        let got = salient_loci(Locus::ORIGIN, 1, 16);
        let want: BTreeSet<Locus> = [(0, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1), (-1, 0, 0), (1, 0, 0)]
            .into_iter()
            .map(|(x, y, z)| Locus::new(x, y, z, 16))
            .collect();
        assert_eq!(got, want);
        assert_eq!(salient_loci(Locus::new(3, 4, 5, 16), 0, 16).len(), 1);
        assert_eq!(salient_loci(Locus::ORIGIN, 16, 16).len(), 4096);
    }

    #[test]
    fn sphere_size_matches_enumeration() {
        let mem = MemoryStore::new(16);
        let center = Locus::new(5, 11, 2, 16);
        for r in 0..=16 {
            assert_eq!(mem.sphere_size(r), salient_loci(center, r, 16).len() as u64, "radius {r}");
        }
        let small = MemoryStore::new(5);
        for r in 0..=6 {
            assert_eq!(small.sphere_size(r), salient_loci(Locus::ORIGIN, r, 5).len() as u64);
        }
    }

    #[test]
    fn duplicate_stores_coexist() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut mem = MemoryStore::new(16);
        mem.store(has(1), &mut rng);
        mem.store(has(1), &mut rng);
        assert_eq!(mem.len(), 2);
        let r = mem.retrieve(&Pattern::exact(&has(1)), 16);
        assert_eq!(r.matches, vec![has(1), has(1)]);
        assert_eq!(r.probes, 4096);
    }

    #[test]
    fn store_writes_then_steps_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut mem = MemoryStore::new(16);
        for k in 0..50 {
            let before = mem.pointer();
            mem.store(has(k), &mut rng);
            assert_eq!(mem.chronology().last().unwrap().0, before);
            assert!(mem.cell(before).contains(&has(k)));
            assert_eq!(torus_distance_sq(before, mem.pointer(), 16), 1);
            assert!(torus_distance(Locus::ORIGIN, mem.pointer(), 16) <= f64::from(k + 1));
        }
    }

    #[test]
    fn empty_memory_still_probes() {
        let mem = MemoryStore::new(16);
        let r = mem.retrieve(&Pattern::any(Predicate::Score), 1);
        assert!(r.matches.is_empty());
        assert_eq!(r.probes, 7);
    }

    #[test]
    fn previous_store_is_always_within_radius_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut mem = MemoryStore::new(16);
        for k in 0..200 {
            mem.store(has(k), &mut rng);
            assert!(mem.is_salient(&Pattern::exact(&has(k)), 1).0);
        }
    }

    #[test]
    fn never_stored_is_never_salient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut mem = MemoryStore::new(16);
        for k in 0..20 {
            mem.store(has(k), &mut rng);
        }
        for r in [0, 1, 5, 16] {
            assert!(!mem.is_salient(&Pattern::exact(&has(999)), r).0);
        }
    }

    #[test]
    fn far_walk_hides_old_item_at_radius_one() {
        // Search seeds for a walk that wanders at least 2 away from the item.
        let found = (0..100u64).any(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut mem = MemoryStore::new(16);
            mem.store(has(0), &mut rng);
            for k in 1..10 {
                mem.store(has(k), &mut rng);
            }
            let far = torus_distance_sq(Locus::ORIGIN, mem.pointer(), 16) >= 4;
            far && !mem.is_salient(&Pattern::exact(&has(0)), 1).0 && mem.is_salient(&Pattern::exact(&has(0)), 16).0
        });
        assert!(found);
    }

    #[test]
    fn matches_ordered_by_distance_then_age() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut mem = MemoryStore::new(16);
        for k in 0..30 {
            mem.store(has(k), &mut rng);
        }
        let r = mem.retrieve(&Pattern::has(AgentId::A), 16);
        let key = |p: &Proposition| {
            let (i, (l, _)) = mem.chronology().iter().enumerate().find(|(_, (_, q))| q == p).unwrap();
            (torus_distance_sq(mem.pointer(), *l, 16), i)
        };
        let keys: Vec<_> = r.matches.iter().map(key).collect();
        assert!(keys.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn pattern_wildcards() {
        let score = Proposition::Score { item: ItemId(4), points: 56 };
        assert!(Pattern::score(ItemId(4)).matches(&score));
        assert!(!Pattern::score(ItemId(5)).matches(&score));
        assert!(Pattern::any(Predicate::Score).matches(&score));
        assert!(!Pattern::has(AgentId::A).matches(&score));
        assert!(Pattern::has(AgentId::A).matches(&has(2)));
        assert!(!Pattern::has(AgentId::B).matches(&has(2)));
    }
}
