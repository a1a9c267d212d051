use rg_querygraph::{bit, members, NodeId, NodeSet};

pub const DEFAULT_CHUNK_SIZE: usize = 2048;

/// Column-major batch of intermediate rows. `cols[n]` holds node `n`'s
/// slots when `n` is in `present`, and is empty otherwise.
#[derive(Clone, Debug, Default)]
pub struct Chunk {
    pub present: NodeSet,
    pub cols: Vec<Vec<u64>>,
    pub len: usize,
}

impl Chunk {
    pub fn new(width: usize, present: NodeSet) -> Chunk {
        Chunk { present, cols: vec![Vec::new(); width], len: 0 }
    }

    #[inline]
    pub fn get(&self, n: NodeId, row: usize) -> u64 {
        debug_assert!(self.present & bit(n) != 0, "node {n} not in chunk");
        self.cols[n][row]
    }

    /// Append row `i` of `src` extended by `extra` (node, slot) pairs.
    pub fn push_from(&mut self, src: &Chunk, i: usize, extra: &[(NodeId, u64)]) {
        for n in members(src.present) {
            self.cols[n].push(src.cols[n][i]);
        }
        for &(n, v) in extra {
            self.cols[n].push(v);
        }
        self.len += 1;
    }

    /// Append the concatenation of row `i` of `a` and row `j` of `b`.
    pub fn push_pair(&mut self, a: &Chunk, i: usize, b: &Chunk, j: usize) {
        for n in members(a.present) {
            self.cols[n].push(a.cols[n][i]);
        }
        for n in members(b.present) {
            self.cols[n].push(b.cols[n][j]);
        }
        self.len += 1;
    }

    pub fn append(&mut self, other: &Chunk) {
        for n in members(other.present) {
            self.cols[n].extend_from_slice(&other.cols[n]);
        }
        self.len += other.len;
    }

    /// Rows `[from, to)` as a new chunk.
    pub fn slice(&self, from: usize, to: usize) -> Chunk {
        let mut c = Chunk::new(self.cols.len(), self.present);
        for n in members(self.present) {
            c.cols[n] = self.cols[n][from..to].to_vec();
        }
        c.len = to - from;
        c
    }
}
