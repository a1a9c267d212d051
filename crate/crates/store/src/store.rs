use std::collections::HashMap;

use crate::arena::Arena;
use crate::config::StoreConfig;
use crate::error::{Result, StoreError};
use crate::schema::{Column, ColumnType, Schema};
use crate::value::{Cell, PlainValue, RefForm, RefMode, RefValue, RelId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FragmentId(pub u32);

impl FragmentId {
    /// The shared empty fragment every store starts with.
    pub const EMPTY: FragmentId = FragmentId(0);
}

/// Physical address of one tuple: a storage fragment and a row inside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowLoc {
    pub frag: FragmentId,
    pub row: u32,
}

impl RowLoc {
    #[inline]
    pub fn pack(self) -> u64 {
        ((self.frag.0 as u64) << 32) | self.row as u64
    }

    #[inline]
    pub fn unpack(v: u64) -> RowLoc {
        RowLoc { frag: FragmentId((v >> 32) as u32), row: v as u32 }
    }
}

const NO_EXTENT: u32 = u32::MAX;
const DIRECT_TAG: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Handle {
    Empty,
    /// Contiguous rows; `cap_rows` is the reserved capacity.
    Segment { ext: u32, off: u32, cap_rows: u32 },
    /// Chain of fixed-size blocks, each holding `block_size / row_width` rows.
    Blocks { blocks: Vec<u32> },
    /// A row range of another fragment, without storage of its own.
    View { parent: FragmentId, start: u32, len: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub id: FragmentId,
    pub owner: RelId,
    pub handle: Handle,
    pub tuple_count: usize,
}

pub(crate) struct FragEntry {
    pub owner: RelId,
    pub handle: Handle,
    pub rows: u32,
    pub width: u32,
    pub live: bool,
}

/// The tuples a reference resolves to: `len` rows of storage fragment
/// `frag` starting at `start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FragView {
    pub frag: FragmentId,
    pub start: u32,
    pub len: u32,
}

impl FragView {
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = RowLoc> {
        let f = self.frag;
        (self.start..self.start + self.len).map(move |row| RowLoc { frag: f, row })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AppendReport {
    pub moved_bytes: u64,
    pub promoted: bool,
    pub relocated: bool,
    /// (old location, new location) for every direct reference that now
    /// points at a stale address.
    pub patches: Vec<(u64, u64)>,
}

pub struct ExtendedRelation {
    pub name: String,
    pub schema: Schema,
    pub(crate) fragments: Vec<FragmentId>,
    pub(crate) strings: Vec<String>,
}

impl ExtendedRelation {
    pub fn fragments(&self) -> &[FragmentId] {
        &self.fragments
    }
}

pub struct Store {
    cfg: StoreConfig,
    pub(crate) arena: Arena,
    pub(crate) frags: Vec<FragEntry>,
    pub(crate) relations: Vec<ExtendedRelation>,
    by_name: HashMap<String, RelId>,
    pub(crate) direct_index: HashMap<u64, FragmentId>,
    pub(crate) moved: u64,
}

impl Store {
    pub fn new(cfg: StoreConfig) -> Result<Store> {
        cfg.validate()?;
        let arena = Arena::new(cfg.block_size as usize);
        let empty = FragEntry { owner: RelId::ANY, handle: Handle::Empty, rows: 0, width: 0, live: true };
        Ok(Store {
            cfg,
            arena,
            frags: vec![empty],
            relations: Vec::new(),
            by_name: HashMap::new(),
            direct_index: HashMap::new(),
            moved: 0,
        })
    }

    pub(crate) fn from_parts(
        cfg: StoreConfig,
        arena: Arena,
        frags: Vec<FragEntry>,
        relations: Vec<ExtendedRelation>,
        direct_index: HashMap<u64, FragmentId>,
    ) -> Store {
        let by_name = relations
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name.clone(), RelId(i as u32)))
            .collect();
        Store { cfg, arena, frags, relations, by_name, direct_index, moved: 0 }
    }

    pub fn config(&self) -> &StoreConfig {
        &self.cfg
    }

    pub fn create_relation(&mut self, name: &str, columns: Vec<Column>) -> Result<RelId> {
        if self.by_name.contains_key(name) {
            return Err(StoreError::Schema(format!("relation `{name}` already exists")));
        }
        let schema = Schema::new(columns);
        if schema.row_width() > self.cfg.block_size as usize {
            return Err(StoreError::Schema(format!("row of `{name}` does not fit in a block")));
        }
        let id = RelId(self.relations.len() as u32);
        self.relations.push(ExtendedRelation {
            name: name.to_string(),
            schema,
            fragments: Vec::new(),
            strings: Vec::new(),
        });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn relation(&self, id: RelId) -> &ExtendedRelation {
        &self.relations[id.0 as usize]
    }

    pub fn relation_id(&self, name: &str) -> Option<RelId> {
        self.by_name.get(name).copied()
    }

    pub fn relations(&self) -> impl Iterator<Item = (RelId, &ExtendedRelation)> {
        self.relations.iter().enumerate().map(|(i, r)| (RelId(i as u32), r))
    }

    pub fn schema(&self, id: RelId) -> &Schema {
        &self.relations[id.0 as usize].schema
    }

    pub fn tuple_count(&self, rel: RelId) -> usize {
        self.relation(rel).fragments.iter().map(|f| self.frags[f.0 as usize].rows as usize).sum()
    }

    fn entry(&self, id: FragmentId) -> Result<&FragEntry> {
        match self.frags.get(id.0 as usize) {
            Some(e) if e.live => Ok(e),
            _ => Err(StoreError::UnregisteredFragment(id.0)),
        }
    }

    pub fn fragment(&self, id: FragmentId) -> Result<Fragment> {
        let e = self.entry(id)?;
        Ok(Fragment { id, owner: e.owner, handle: e.handle.clone(), tuple_count: e.rows as usize })
    }

    /// Byte size of the row data held by a storage fragment.
    pub fn fragment_bytes(&self, id: FragmentId) -> usize {
        let e = &self.frags[id.0 as usize];
        e.rows as usize * e.width as usize
    }

    fn encode_row(&mut self, rel: RelId, cells: &[Cell]) -> Result<Vec<u8>> {
        let r = &mut self.relations[rel.0 as usize];
        if cells.len() != r.schema.arity() {
            return Err(StoreError::Schema(format!(
                "`{}` expects {} cells, got {}",
                r.name,
                r.schema.arity(),
                cells.len()
            )));
        }
        let mut buf = vec![0u8; r.schema.row_width()];
        for (i, cell) in cells.iter().enumerate() {
            let col = &r.schema.columns[i];
            let at = r.schema.offset(i);
            let valid = match (col.ty, cell) {
                (_, Cell::Plain(PlainValue::Null)) => false,
                (ColumnType::Int, Cell::Plain(PlainValue::Int(v))) => {
                    buf[at..at + 8].copy_from_slice(&v.to_le_bytes());
                    true
                }
                (ColumnType::Float, Cell::Plain(PlainValue::Float(v))) => {
                    buf[at..at + 8].copy_from_slice(&v.to_le_bytes());
                    true
                }
                (ColumnType::Float, Cell::Plain(PlainValue::Int(v))) => {
                    buf[at..at + 8].copy_from_slice(&(*v as f64).to_le_bytes());
                    true
                }
                (ColumnType::Bool, Cell::Plain(PlainValue::Bool(b))) => {
                    buf[at] = *b as u8;
                    true
                }
                (ColumnType::Str, Cell::Plain(PlainValue::Str(s))) => {
                    let h = r.strings.len() as u64;
                    r.strings.push(s.clone());
                    buf[at..at + 8].copy_from_slice(&h.to_le_bytes());
                    true
                }
                (ColumnType::Label, Cell::Plain(PlainValue::Int(v))) if *v >= 0 && *v <= u32::MAX as i64 => {
                    buf[at..at + 4].copy_from_slice(&(*v as u32).to_le_bytes());
                    true
                }
                (ColumnType::Ref(target), Cell::Ref(rv)) => {
                    if rv.target != target && rv.target != RelId::ANY {
                        return Err(StoreError::Schema(format!(
                            "column `{}` of `{}` references relation {}, got a reference into {}",
                            col.name, r.name, target.0, rv.target.0
                        )));
                    }
                    let (a, b) = match rv.form {
                        RefForm::Indirect { segment_id, offset } => (segment_id, offset),
                        RefForm::Direct { location } => (DIRECT_TAG, location),
                    };
                    buf[at..at + 8].copy_from_slice(&a.to_le_bytes());
                    buf[at + 8..at + 16].copy_from_slice(&b.to_le_bytes());
                    true
                }
                (ty, c) => {
                    return Err(StoreError::Schema(format!(
                        "column `{}` of `{}` has type {:?}, got {:?}",
                        col.name, r.name, ty, c
                    )))
                }
            };
            if valid {
                buf[i / 8] |= 1 << (i % 8);
            }
        }
        Ok(buf)
    }

    #[inline]
    fn row_pos(&self, e: &FragEntry, row: u32) -> (u32, usize) {
        let w = e.width as usize;
        match &e.handle {
            Handle::Segment { ext, off, .. } => (*ext, *off as usize + row as usize * w),
            Handle::Blocks { blocks } => {
                let rpb = self.arena.block_size / w;
                (blocks[row as usize / rpb], (row as usize % rpb) * w)
            }
            _ => unreachable!("row access on a fragment without storage"),
        }
    }

    /// Raw bytes of one row.
    #[inline]
    pub fn row_bytes(&self, loc: RowLoc) -> &[u8] {
        let e = &self.frags[loc.frag.0 as usize];
        debug_assert!(loc.row < e.rows, "row {} out of range", loc.row);
        let (ext, off) = self.row_pos(e, loc.row);
        self.arena.bytes(ext, off, e.width as usize)
    }

    #[inline]
    fn cell_bytes(&self, loc: RowLoc, col: usize) -> Option<&[u8]> {
        let owner = self.frags[loc.frag.0 as usize].owner;
        let schema = &self.relations[owner.0 as usize].schema;
        let row = self.row_bytes(loc);
        if row[col / 8] & (1 << (col % 8)) == 0 {
            return None;
        }
        let at = schema.offset(col);
        Some(&row[at..at + schema.columns[col].ty.width()])
    }

    #[inline]
    pub fn read_i64(&self, loc: RowLoc, col: usize) -> Option<i64> {
        self.cell_bytes(loc, col).map(|b| i64::from_le_bytes(b[..8].try_into().unwrap()))
    }

    #[inline]
    pub fn read_u32(&self, loc: RowLoc, col: usize) -> Option<u32> {
        self.cell_bytes(loc, col).map(|b| u32::from_le_bytes(b[..4].try_into().unwrap()))
    }

    #[inline]
    pub fn read_ref(&self, loc: RowLoc, col: usize) -> Option<RefValue> {
        let owner = self.frags[loc.frag.0 as usize].owner;
        let target = match self.relations[owner.0 as usize].schema.columns[col].ty {
            ColumnType::Ref(t) => t,
            _ => return None,
        };
        self.cell_bytes(loc, col).map(|b| decode_ref(b, target))
    }

    pub fn read_cell(&self, loc: RowLoc, col: usize) -> Cell {
        let owner = self.frags[loc.frag.0 as usize].owner;
        let rel = &self.relations[owner.0 as usize];
        let Some(b) = self.cell_bytes(loc, col) else {
            return Cell::Plain(PlainValue::Null);
        };
        match rel.schema.columns[col].ty {
            ColumnType::Int => Cell::Plain(PlainValue::Int(i64::from_le_bytes(b.try_into().unwrap()))),
            ColumnType::Float => Cell::Plain(PlainValue::Float(f64::from_le_bytes(b.try_into().unwrap()))),
            ColumnType::Bool => Cell::Plain(PlainValue::Bool(b[0] != 0)),
            ColumnType::Str => {
                let h = u64::from_le_bytes(b.try_into().unwrap()) as usize;
                Cell::Plain(PlainValue::Str(rel.strings[h].clone()))
            }
            ColumnType::Label => Cell::Plain(PlainValue::Int(u32::from_le_bytes(b.try_into().unwrap()) as i64)),
            ColumnType::Ref(t) => Cell::Ref(decode_ref(b, t)),
        }
    }

    pub fn read_plain(&self, loc: RowLoc, col: usize) -> PlainValue {
        match self.read_cell(loc, col) {
            Cell::Plain(v) => v,
            Cell::Ref(_) => PlainValue::Null,
        }
    }

    pub fn read_row(&self, loc: RowLoc) -> Vec<Cell> {
        let owner = self.frags[loc.frag.0 as usize].owner;
        (0..self.relations[owner.0 as usize].schema.arity()).map(|c| self.read_cell(loc, c)).collect()
    }

    /// Owning relation of a storage fragment.
    pub fn owner(&self, frag: FragmentId) -> RelId {
        self.frags[frag.0 as usize].owner
    }

    pub fn write_cell(&mut self, loc: RowLoc, col: usize, cell: Cell) -> Result<()> {
        let owner = self.entry(loc.frag)?.owner;
        let mut row = self.read_row(loc);
        row[col] = cell;
        let bytes = self.encode_row(owner, &row)?;
        let e = &self.frags[loc.frag.0 as usize];
        let (ext, off) = self.row_pos(e, loc.row);
        let w = e.width as usize;
        self.arena.bytes_mut(ext, off, w).copy_from_slice(&bytes);
        Ok(())
    }

    fn alloc_storage(&mut self, rows: usize, width: usize) -> Handle {
        let bytes = rows * width;
        if self.cfg.wants_blocks(bytes) {
            let rpb = self.arena.block_size / width;
            let n = rows.div_ceil(rpb);
            Handle::Blocks { blocks: (0..n).map(|_| self.arena.alloc_block()).collect() }
        } else if rows == 0 {
            Handle::Segment { ext: NO_EXTENT, off: 0, cap_rows: 0 }
        } else {
            let (ext, off, cap) = self.arena.alloc_segment(bytes);
            Handle::Segment { ext, off, cap_rows: (cap / width) as u32 }
        }
    }

    fn free_storage(&mut self, handle: &Handle, width: usize) {
        match handle {
            Handle::Segment { ext, off, cap_rows } if *ext != NO_EXTENT => {
                self.arena.free_segment(*ext, *off, *cap_rows as usize * width)
            }
            Handle::Blocks { blocks } => {
                for b in blocks {
                    self.arena.free_block(*b);
                }
            }
            _ => {}
        }
    }

    fn write_rows(&mut self, frag: FragmentId, first_row: u32, rows: &[Vec<u8>]) {
        for (i, bytes) in rows.iter().enumerate() {
            let e = &self.frags[frag.0 as usize];
            let (ext, off) = self.row_pos(e, first_row + i as u32);
            self.arena.bytes_mut(ext, off, bytes.len()).copy_from_slice(bytes);
        }
    }

    fn encode_rows(&mut self, rel: RelId, rows: &[Vec<Cell>]) -> Result<Vec<Vec<u8>>> {
        rows.iter().map(|r| self.encode_row(rel, r)).collect()
    }

    /// Register a new fragment of `rel` holding `rows`; it becomes part of
    /// the relation's partition.
    pub fn insert_fragment(&mut self, rel: RelId, rows: &[Vec<Cell>]) -> Result<FragmentId> {
        let encoded = self.encode_rows(rel, rows)?;
        let width = self.schema(rel).row_width();
        let handle = self.alloc_storage(encoded.len(), width);
        let id = self.push_entry(rel, handle, encoded.len() as u32, width as u32);
        self.write_rows(id, 0, &encoded);
        self.relations[rel.0 as usize].fragments.push(id);
        Ok(id)
    }

    /// Like two `insert_fragment` calls, but when both land in segment form
    /// they are carved from one contiguous allocation.
    pub fn insert_fragment_pair(
        &mut self,
        a: (RelId, &[Vec<Cell>]),
        b: (RelId, &[Vec<Cell>]),
    ) -> Result<(FragmentId, FragmentId)> {
        let ea = self.encode_rows(a.0, a.1)?;
        let eb = self.encode_rows(b.0, b.1)?;
        let (wa, wb) = (self.schema(a.0).row_width(), self.schema(b.0).row_width());
        let (ba, bb) = (ea.len() * wa, eb.len() * wb);
        let (ha, hb) = if ba > 0 && bb > 0 && !self.cfg.wants_blocks(ba) && !self.cfg.wants_blocks(bb) {
            // a reused free slot may be larger; the slack goes to the second part
            let (ext, off, cap) = self.arena.alloc_segment(ba + bb);
            let hb_cap = cap - ba;
            (
                Handle::Segment { ext, off, cap_rows: ea.len() as u32 },
                Handle::Segment { ext, off: off + ba as u32, cap_rows: (hb_cap / wb) as u32 },
            )
        } else {
            (self.alloc_storage(ea.len(), wa), self.alloc_storage(eb.len(), wb))
        };
        let fa = self.push_entry(a.0, ha, ea.len() as u32, wa as u32);
        let fb = self.push_entry(b.0, hb, eb.len() as u32, wb as u32);
        self.write_rows(fa, 0, &ea);
        self.write_rows(fb, 0, &eb);
        self.relations[a.0 .0 as usize].fragments.push(fa);
        self.relations[b.0 .0 as usize].fragments.push(fb);
        Ok((fa, fb))
    }

    /// True when `b`'s storage starts right where `a`'s reserved space ends.
    pub fn is_adjacent(&self, a: FragmentId, b: FragmentId) -> bool {
        let (Ok(ea), Ok(eb)) = (self.entry(a), self.entry(b)) else {
            return false;
        };
        match (&ea.handle, &eb.handle) {
            (
                Handle::Segment { ext: x, off: oa, cap_rows },
                Handle::Segment { ext: y, off: ob, .. },
            ) => *x != NO_EXTENT && x == y && *oa as usize + *cap_rows as usize * ea.width as usize == *ob as usize,
            _ => false,
        }
    }

    fn push_entry(&mut self, owner: RelId, handle: Handle, rows: u32, width: u32) -> FragmentId {
        self.frags.push(FragEntry { owner, handle, rows, width, live: true });
        FragmentId((self.frags.len() - 1) as u32)
    }

    /// A fragment naming rows `start..start+len` of `parent`.
    pub fn create_view(&mut self, parent: FragmentId, start: u32, len: u32) -> Result<FragmentId> {
        let e = self.entry(parent)?;
        if matches!(e.handle, Handle::View { .. } | Handle::Empty) {
            return Err(StoreError::Schema("views must sit over a storage fragment".into()));
        }
        let (owner, width) = (e.owner, e.width);
        Ok(self.push_entry(owner, Handle::View { parent, start, len }, len, width))
    }

    /// Re-point a view after its parent rows moved.
    pub fn move_view(&mut self, view: FragmentId, start: u32) -> Result<()> {
        self.entry(view)?;
        match &mut self.frags[view.0 as usize].handle {
            Handle::View { start: s, .. } => {
                *s = start;
                Ok(())
            }
            _ => Err(StoreError::Schema("not a view".into())),
        }
    }

    fn address_of(&self, id: FragmentId) -> u64 {
        let e = &self.frags[id.0 as usize];
        match &e.handle {
            Handle::Empty => 0,
            Handle::Segment { ext, off, .. } => {
                if *ext == NO_EXTENT {
                    // unallocated zero-capacity segment: a unique fake address
                    // outside the arena's range
                    u64::MAX - id.0 as u64
                } else {
                    self.arena.address(*ext, *off as usize)
                }
            }
            Handle::Blocks { blocks } => match blocks.first() {
                Some(b) => self.arena.address(*b, 0),
                None => u64::MAX - id.0 as u64,
            },
            Handle::View { parent, start, .. } => {
                let pe = &self.frags[parent.0 as usize];
                let (ext, off) = self.row_pos(pe, *start);
                self.arena.address(ext, off)
            }
        }
    }

    /// The reference function: a reference that resolves to `frag`.
    pub fn make_ref(&mut self, frag: FragmentId, mode: RefMode) -> Result<RefValue> {
        let owner = self.entry(frag)?.owner;
        let form = match mode {
            RefMode::Indirect => RefForm::Indirect { segment_id: frag.0 as u64, offset: 0 },
            RefMode::Direct => {
                let location = self.address_of(frag);
                if frag != FragmentId::EMPTY {
                    self.direct_index.insert(location, frag);
                }
                RefForm::Direct { location }
            }
        };
        Ok(RefValue { form, target: owner })
    }

    /// The dereference function.
    #[inline]
    pub fn resolve(&self, r: &RefValue) -> Result<FragView> {
        let id = match r.form {
            RefForm::Indirect { segment_id, .. } => FragmentId(segment_id as u32),
            RefForm::Direct { location } => {
                if location == 0 {
                    FragmentId::EMPTY
                } else {
                    let id = *self.direct_index.get(&location).ok_or(StoreError::DanglingRef(location))?;
                    if self.address_of(id) != location {
                        return Err(StoreError::DanglingRef(location));
                    }
                    id
                }
            }
        };
        self.view_of(id)
    }

    #[inline]
    pub fn view_of(&self, id: FragmentId) -> Result<FragView> {
        let e = self.entry(id)?;
        Ok(match &e.handle {
            Handle::Empty => FragView { frag: id, start: 0, len: 0 },
            Handle::View { parent, start, len } => FragView { frag: *parent, start: *start, len: *len },
            _ => FragView { frag: id, start: 0, len: e.rows },
        })
    }

    pub fn append_to_fragment(&mut self, frag: FragmentId, rows: &[Vec<Cell>]) -> Result<AppendReport> {
        let e = self.entry(frag)?;
        if matches!(e.handle, Handle::Empty | Handle::View { .. }) {
            return Err(StoreError::Schema("cannot append to the empty fragment or a view".into()));
        }
        let owner = e.owner;
        let encoded = self.encode_rows(owner, rows)?;
        let mut report = AppendReport::default();
        if encoded.is_empty() {
            return Ok(report);
        }
        let old_addr = self.address_of(frag);
        let e = &self.frags[frag.0 as usize];
        let (n, w) = (e.rows as usize, e.width as usize);
        let total = n + encoded.len();
        let rpb = self.arena.block_size / w;
        match e.handle.clone() {
            Handle::Blocks { mut blocks } => {
                while blocks.len() * rpb < total {
                    blocks.push(self.arena.alloc_block());
                }
                self.frags[frag.0 as usize].handle = Handle::Blocks { blocks };
            }
            Handle::Segment { ext, off, cap_rows } => {
                if self.cfg.wants_blocks(total * w) {
                    let blocks: Vec<u32> = (0..total.div_ceil(rpb)).map(|_| self.arena.alloc_block()).collect();
                    let new_handle = Handle::Blocks { blocks };
                    self.relocate(frag, &Handle::Segment { ext, off, cap_rows }, new_handle, n, w);
                    report.promoted = true;
                    report.relocated = true;
                    report.moved_bytes = (n * w) as u64;
                } else if total > cap_rows as usize {
                    let want = ((total as f64) * self.cfg.segment_reserve_factor).ceil() as usize;
                    let mut cap_bytes = want.max(total) * w;
                    if self.cfg.policy != crate::config::FragmentPolicy::PureSegment {
                        cap_bytes = cap_bytes.min(self.arena.block_size).max(total * w);
                    }
                    let (nx, no, nc) = self.arena.alloc_segment(cap_bytes);
                    let new_handle = Handle::Segment { ext: nx, off: no, cap_rows: (nc / w) as u32 };
                    self.relocate(frag, &Handle::Segment { ext, off, cap_rows }, new_handle, n, w);
                    report.relocated = true;
                    report.moved_bytes = (n * w) as u64;
                }
            }
            _ => unreachable!(),
        }
        self.frags[frag.0 as usize].rows = total as u32;
        self.write_rows(frag, n as u32, &encoded);
        self.moved += report.moved_bytes;
        if report.relocated {
            if let Some(id) = self.direct_index.remove(&old_addr) {
                let new_addr = self.address_of(frag);
                self.direct_index.insert(new_addr, id);
                report.patches.push((old_addr, new_addr));
            }
        }
        Ok(report)
    }

    /// Move the first `n` rows of `frag` into `new_handle` and release the
    /// old storage.
    fn relocate(&mut self, frag: FragmentId, old: &Handle, new_handle: Handle, n: usize, w: usize) {
        let positions: Vec<(u32, usize)> = {
            let e = &self.frags[frag.0 as usize];
            (0..n as u32).map(|r| self.row_pos(e, r)).collect()
        };
        self.frags[frag.0 as usize].handle = new_handle;
        for (r, from) in positions.into_iter().enumerate() {
            let to = self.row_pos(&self.frags[frag.0 as usize], r as u32);
            self.arena.copy(from, to, w);
        }
        self.free_storage(old, w);
    }

    /// Remove one row by moving the fragment's last row into its slot.
    /// Returns the former index of the row that moved, if any.
    pub fn remove_row(&mut self, loc: RowLoc) -> Result<Option<u32>> {
        let e = self.entry(loc.frag)?;
        if matches!(e.handle, Handle::Empty | Handle::View { .. }) || loc.row >= e.rows {
            return Err(StoreError::Schema(format!("no row {} in fragment {}", loc.row, loc.frag.0)));
        }
        let (n, w) = (e.rows, e.width as usize);
        let last = n - 1;
        let moved_from = if loc.row != last {
            let from = self.row_pos(e, last);
            let to = self.row_pos(e, loc.row);
            self.arena.copy(from, to, w);
            Some(last)
        } else {
            None
        };
        self.frags[loc.frag.0 as usize].rows = last;
        let rows = last as usize;
        let rpb = self.arena.block_size / w;
        if let Handle::Blocks { blocks } = self.frags[loc.frag.0 as usize].handle.clone() {
            if !self.cfg.wants_blocks(rows * w) {
                let new_handle = self.alloc_storage(rows, w);
                let old = Handle::Blocks { blocks };
                self.relocate(loc.frag, &old, new_handle, rows, w);
                self.moved += (rows * w) as u64;
            } else if blocks.len() > rows.div_ceil(rpb) {
                let mut blocks = blocks;
                while blocks.len() > rows.div_ceil(rpb) {
                    let b = blocks.pop().unwrap();
                    self.arena.free_block(b);
                }
                self.frags[loc.frag.0 as usize].handle = Handle::Blocks { blocks };
            }
        }
        Ok(moved_from)
    }

    /// Release a fragment's storage and drop it from its relation.
    pub fn drop_fragment(&mut self, frag: FragmentId) -> Result<()> {
        if frag == FragmentId::EMPTY {
            return Ok(());
        }
        let e = self.entry(frag)?;
        let (owner, handle, w) = (e.owner, e.handle.clone(), e.width as usize);
        self.free_storage(&handle, w);
        self.frags[frag.0 as usize].live = false;
        if !matches!(handle, Handle::View { .. }) {
            self.relations[owner.0 as usize].fragments.retain(|f| *f != frag);
        }
        Ok(())
    }

    /// Every row of a relation, fragment by fragment.
    pub fn scan(&self, rel: RelId) -> impl Iterator<Item = RowLoc> + '_ {
        self.relation(rel).fragments.iter().flat_map(move |&f| {
            let rows = self.frags[f.0 as usize].rows;
            (0..rows).map(move |row| RowLoc { frag: f, row })
        })
    }

    /// Append rows to the relation's last fragment, creating one if needed.
    pub fn append_rows(&mut self, rel: RelId, rows: &[Vec<Cell>]) -> Result<AppendReport> {
        match self.relation(rel).fragments.last().copied() {
            Some(f) => self.append_to_fragment(f, rows),
            None => {
                self.insert_fragment(rel, rows)?;
                Ok(AppendReport::default())
            }
        }
    }

    /// Reserved bytes: live segment capacities plus live blocks.
    pub fn storage_bytes(&self) -> u64 {
        self.arena.reserved_bytes()
    }

    /// Bytes of row data actually held.
    pub fn data_bytes(&self) -> u64 {
        self.relations
            .iter()
            .flat_map(|r| r.fragments.iter())
            .map(|f| self.fragment_bytes(*f) as u64)
            .sum()
    }

    /// Total bytes copied by reallocations since creation or the last reset.
    pub fn bytes_moved(&self) -> u64 {
        self.moved
    }

    pub fn reset_bytes_moved(&mut self) {
        self.moved = 0;
    }

    /// All live fragment ids, including views and the empty sentinel.
    pub fn fragment_ids(&self) -> impl Iterator<Item = FragmentId> + '_ {
        self.frags.iter().enumerate().filter(|(_, e)| e.live).map(|(i, _)| FragmentId(i as u32))
    }
}

#[inline]
fn decode_ref(b: &[u8], target: RelId) -> RefValue {
    let a = u64::from_le_bytes(b[..8].try_into().unwrap());
    let c = u64::from_le_bytes(b[8..16].try_into().unwrap());
    let form = if a == DIRECT_TAG {
        RefForm::Direct { location: c }
    } else {
        RefForm::Indirect { segment_id: a, offset: c }
    };
    RefValue { form, target }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FragmentPolicy;

    fn edge_store(cfg: StoreConfig) -> (Store, RelId) {
        let mut s = Store::new(cfg).unwrap();
        let r = s
            .create_relation(
                "E",
                vec![
                    Column::new("eid", ColumnType::Int),
                    Column::new("label", ColumnType::Label),
                    Column::new("w", ColumnType::Str),
                    Column::new("pad", ColumnType::Int),
                ],
            )
            .unwrap();
        (s, r)
    }

    fn rows(range: std::ops::Range<i64>) -> Vec<Vec<Cell>> {
        // 32-byte rows
        range.map(|i| vec![Cell::from(i), Cell::from(1), Cell::from("x"), Cell::from(0)]).collect()
    }

    fn eids(s: &Store, v: FragView) -> Vec<i64> {
        let mut out: Vec<i64> = v.iter().map(|l| s.read_i64(l, 0).unwrap()).collect();
        out.sort();
        out
    }

    #[test]
    fn ref_roundtrip_three_tuples() {
        let (mut s, r) = edge_store(StoreConfig::default());
        let f = s.insert_fragment(r, &rows(0..3)).unwrap();
        let rv = s.make_ref(f, RefMode::Indirect).unwrap();
        assert_eq!(s.resolve(&rv).unwrap().len(), 3);
        let again = s.make_ref(f, RefMode::Indirect).unwrap();
        assert_eq!(eids(&s, s.resolve(&rv).unwrap()), eids(&s, s.resolve(&again).unwrap()));
    }

    #[test]
    fn empty_fragment_resolves_to_nothing() {
        let (mut s, _) = edge_store(StoreConfig::default());
        for mode in [RefMode::Direct, RefMode::Indirect] {
            let rv = s.make_ref(FragmentId::EMPTY, mode).unwrap();
            assert!(s.resolve(&rv).unwrap().is_empty());
        }
    }

    #[test]
    fn unknown_fragment_is_rejected() {
        let (mut s, _) = edge_store(StoreConfig::default());
        assert!(matches!(s.make_ref(FragmentId(99), RefMode::Indirect), Err(StoreError::UnregisteredFragment(99))));
    }

    #[test]
    fn small_append_stays_segment_and_moves_at_most_old_size() {
        let (mut s, r) = edge_store(StoreConfig::default());
        // 32 rows of 32 bytes = 1KB
        let f = s.insert_fragment(r, &rows(0..32)).unwrap();
        let rep = s.append_to_fragment(f, &rows(100..103)).unwrap();
        assert!(matches!(s.fragment(f).unwrap().handle, Handle::Segment { .. }));
        assert!(rep.moved_bytes <= 1024 + 96);
        assert!(!rep.promoted);
    }

    #[test]
    fn crossing_threshold_promotes_then_never_moves() {
        let (mut s, r) = edge_store(StoreConfig::default());
        // 254 rows = 8128 bytes, just under 8KB
        let f = s.insert_fragment(r, &rows(0..254)).unwrap();
        let rv = s.make_ref(f, RefMode::Indirect).unwrap();
        assert!(matches!(s.fragment(f).unwrap().handle, Handle::Segment { .. }));
        let rep = s.append_to_fragment(f, &rows(1000..1007)).unwrap();
        assert!(rep.promoted);
        assert!(matches!(s.fragment(f).unwrap().handle, Handle::Blocks { .. }));
        assert_eq!(s.resolve(&rv).unwrap().len(), 261);
        for i in 0..3000 {
            let rep = s.append_to_fragment(f, &rows(5000 + i..5001 + i)).unwrap();
            assert_eq!(rep.moved_bytes, 0);
        }
        assert_eq!(s.resolve(&rv).unwrap().len(), 3261);
        let got = eids(&s, s.resolve(&rv).unwrap());
        assert_eq!(&got[..3], &[0, 1, 2]);
    }

    #[test]
    fn direct_ref_dangles_until_patched() {
        let (mut s, r) = edge_store(StoreConfig::default());
        let f = s.insert_fragment(r, &rows(0..2)).unwrap();
        let d = s.make_ref(f, RefMode::Direct).unwrap();
        assert_eq!(s.resolve(&d).unwrap().len(), 2);
        let rep = s.append_to_fragment(f, &rows(2..3)).unwrap();
        assert!(rep.relocated);
        assert!(matches!(s.resolve(&d), Err(StoreError::DanglingRef(_))));
        let (old, new) = rep.patches[0];
        let RefForm::Direct { location } = d.form else { unreachable!() };
        assert_eq!(location, old);
        let patched = RefValue { form: RefForm::Direct { location: new }, target: d.target };
        assert_eq!(s.resolve(&patched).unwrap().len(), 3);
    }

    #[test]
    fn removal_demotes_below_threshold() {
        let (mut s, r) = edge_store(StoreConfig::default());
        let f = s.insert_fragment(r, &rows(0..300)).unwrap();
        assert!(matches!(s.fragment(f).unwrap().handle, Handle::Blocks { .. }));
        while s.fragment(f).unwrap().tuple_count * 32 >= 8192 {
            s.remove_row(RowLoc { frag: f, row: 0 }).unwrap();
        }
        assert!(matches!(s.fragment(f).unwrap().handle, Handle::Segment { .. }));
        assert_eq!(s.fragment(f).unwrap().tuple_count, 255);
    }

    #[test]
    fn pure_policies() {
        let (mut s, r) = edge_store(StoreConfig::default().with_policy(FragmentPolicy::PureBlock));
        let f = s.insert_fragment(r, &rows(0..1)).unwrap();
        assert!(matches!(s.fragment(f).unwrap().handle, Handle::Blocks { .. }));
        assert_eq!(s.storage_bytes(), 65536);
        let (mut s, r) = edge_store(StoreConfig::default().with_policy(FragmentPolicy::PureSegment));
        let f = s.insert_fragment(r, &rows(0..5000)).unwrap();
        assert!(matches!(s.fragment(f).unwrap().handle, Handle::Segment { .. }));
        assert_eq!(s.storage_bytes(), 5000 * 32);
    }

    #[test]
    fn pair_allocation_is_adjacent() {
        let (mut s, r) = edge_store(StoreConfig::default());
        let (a, b) = s.insert_fragment_pair((r, &rows(0..3)), (r, &rows(3..5))).unwrap();
        assert!(s.is_adjacent(a, b));
        let c = s.insert_fragment(r, &rows(0..1)).unwrap();
        assert!(!s.is_adjacent(a, c));
    }

    #[test]
    fn views_follow_moves() {
        let (mut s, r) = edge_store(StoreConfig::default());
        let f = s.insert_fragment(r, &rows(0..4)).unwrap();
        let v = s.create_view(f, 3, 1).unwrap();
        let rv = s.make_ref(v, RefMode::Indirect).unwrap();
        let moved = s.remove_row(RowLoc { frag: f, row: 1 }).unwrap();
        assert_eq!(moved, Some(3));
        s.move_view(v, 1).unwrap();
        assert_eq!(eids(&s, s.resolve(&rv).unwrap()), vec![3]);
    }

    #[test]
    fn schema_mismatch() {
        let (mut s, r) = edge_store(StoreConfig::default());
        assert!(matches!(s.insert_fragment(r, &[vec![Cell::from("a")]]), Err(StoreError::Schema(_))));
        assert!(matches!(
            s.insert_fragment(r, &[vec![Cell::from("a"), Cell::from(1), Cell::from("x"), Cell::from(0)]]),
            Err(StoreError::Schema(_))
        ));
    }
}
