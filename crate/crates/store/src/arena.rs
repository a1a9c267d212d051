use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ExtentKind {
    Block,
    SegmentPage,
    Oversize,
}

pub(crate) struct Extent {
    pub base: u64,
    pub kind: ExtentKind,
    pub data: Vec<u8>,
}

/// The unified address space: a list of extents laid out at increasing
/// base addresses. Blocks and segment pages are `block_size` long; segments
/// larger than a block get a dedicated extent.
pub(crate) struct Arena {
    pub block_size: usize,
    pub extents: Vec<Extent>,
    next_base: u64,
    free_blocks: Vec<u32>,
    page: Option<(u32, usize)>,
    free_segments: BTreeMap<usize, Vec<(u32, u32)>>,
    pub segment_bytes: u64,
    pub live_blocks: u64,
}

impl Arena {
    pub fn new(block_size: usize) -> Self {
        Arena {
            block_size,
            extents: Vec::new(),
            // address 0 stays unused so it can stand for the empty fragment
            next_base: block_size as u64,
            free_blocks: Vec::new(),
            page: None,
            free_segments: BTreeMap::new(),
            segment_bytes: 0,
            live_blocks: 0,
        }
    }

    fn push_extent(&mut self, kind: ExtentKind, len: usize) -> u32 {
        let base = self.next_base;
        self.next_base += len as u64;
        self.extents.push(Extent { base, kind, data: vec![0; len] });
        (self.extents.len() - 1) as u32
    }

    pub fn alloc_block(&mut self) -> u32 {
        self.live_blocks += 1;
        if let Some(b) = self.free_blocks.pop() {
            return b;
        }
        self.push_extent(ExtentKind::Block, self.block_size)
    }

    pub fn free_block(&mut self, ext: u32) {
        self.live_blocks -= 1;
        self.free_blocks.push(ext);
    }

    /// Allocate a segment of at least `cap` bytes; returns (extent, offset,
    /// actual capacity).
    pub fn alloc_segment(&mut self, cap: usize) -> (u32, u32, usize) {
        debug_assert!(cap > 0);
        let hit = self
            .free_segments
            .range(cap..=cap + cap / 2)
            .next()
            .map(|(c, _)| *c);
        if let Some(c) = hit {
            let list = self.free_segments.get_mut(&c).unwrap();
            let (e, o) = list.pop().unwrap();
            if list.is_empty() {
                self.free_segments.remove(&c);
            }
            self.segment_bytes += c as u64;
            return (e, o, c);
        }
        self.segment_bytes += cap as u64;
        if cap > self.block_size {
            let e = self.push_extent(ExtentKind::Oversize, cap);
            return (e, 0, cap);
        }
        match self.page {
            Some((e, used)) if used + cap <= self.block_size => {
                self.page = Some((e, used + cap));
                (e, used as u32, cap)
            }
            _ => {
                let e = self.push_extent(ExtentKind::SegmentPage, self.block_size);
                self.page = Some((e, cap));
                (e, 0, cap)
            }
        }
    }

    pub fn free_segment(&mut self, ext: u32, off: u32, cap: usize) {
        self.segment_bytes -= cap as u64;
        self.free_segments.entry(cap).or_default().push((ext, off));
    }

    pub fn address(&self, ext: u32, off: usize) -> u64 {
        self.extents[ext as usize].base + off as u64
    }

    pub fn bytes(&self, ext: u32, off: usize, len: usize) -> &[u8] {
        &self.extents[ext as usize].data[off..off + len]
    }

    pub fn bytes_mut(&mut self, ext: u32, off: usize, len: usize) -> &mut [u8] {
        &mut self.extents[ext as usize].data[off..off + len]
    }

    /// Copy `len` bytes between two (possibly identical) extents.
    pub fn copy(&mut self, from: (u32, usize), to: (u32, usize), len: usize) {
        if from.0 == to.0 {
            let d = &mut self.extents[from.0 as usize].data;
            d.copy_within(from.1..from.1 + len, to.1);
        } else {
            let (a, b) = (from.0 as usize, to.0 as usize);
            let (src, dst) = if a < b {
                let (l, r) = self.extents.split_at_mut(b);
                (&l[a], &mut r[0])
            } else {
                let (l, r) = self.extents.split_at_mut(a);
                (&r[0], &mut l[b])
            };
            dst.data[to.1..to.1 + len].copy_from_slice(&src.data[from.1..from.1 + len]);
        }
    }

    pub fn reserved_bytes(&self) -> u64 {
        self.segment_bytes + self.live_blocks * self.block_size as u64
    }

    #[allow(clippy::type_complexity)]
    pub(crate) fn raw_parts(&self) -> (u64, &[u32], Option<(u32, usize)>, &BTreeMap<usize, Vec<(u32, u32)>>) {
        (self.next_base, &self.free_blocks, self.page, &self.free_segments)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_raw_parts(
        block_size: usize,
        extents: Vec<Extent>,
        next_base: u64,
        free_blocks: Vec<u32>,
        page: Option<(u32, usize)>,
        free_segments: BTreeMap<usize, Vec<(u32, u32)>>,
        segment_bytes: u64,
        live_blocks: u64,
    ) -> Self {
        Arena { block_size, extents, next_base, free_blocks, page, free_segments, segment_bytes, live_blocks }
    }
}
