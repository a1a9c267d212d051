//! Flat snapshot of a store: header, segment table, arena, catalog.
//! Little-endian throughout.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use crate::arena::{Arena, Extent, ExtentKind};
use crate::config::{FragmentPolicy, StoreConfig};
use crate::error::{Result, StoreError};
use crate::schema::{Column, ColumnType, Schema};
use crate::store::{ExtendedRelation, FragEntry, FragmentId, Handle, Store};
use crate::value::RelId;

pub const MAGIC: &[u8; 4] = b"RGST";
pub const VERSION: u32 = 1;

struct W<'a, T: Write>(&'a mut T);

impl<T: Write> W<'_, T> {
    fn u8(&mut self, v: u8) -> Result<()> {
        Ok(self.0.write_all(&[v])?)
    }
    fn u32(&mut self, v: u32) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn bytes(&mut self, b: &[u8]) -> Result<()> {
        self.u64(b.len() as u64)?;
        Ok(self.0.write_all(b)?)
    }
    fn str(&mut self, s: &str) -> Result<()> {
        self.bytes(s.as_bytes())
    }
}

struct R<'a, T: Read>(&'a mut T);

impl<T: Read> R<'_, T> {
    fn fill<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b)?;
        Ok(b)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.fill::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.fill()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.fill()?))
    }
    fn bytes(&mut self) -> Result<Vec<u8>> {
        let n = self.u64()? as usize;
        let mut v = vec![0u8; n];
        self.0.read_exact(&mut v)?;
        Ok(v)
    }
    fn str(&mut self) -> Result<String> {
        String::from_utf8(self.bytes()?).map_err(|e| StoreError::Snapshot(e.to_string()))
    }
}

fn policy_tag(p: FragmentPolicy) -> u8 {
    match p {
        FragmentPolicy::Heterogeneous => 0,
        FragmentPolicy::PureSegment => 1,
        FragmentPolicy::PureBlock => 2,
    }
}

fn kind_tag(k: ExtentKind) -> u8 {
    match k {
        ExtentKind::Block => 0,
        ExtentKind::SegmentPage => 1,
        ExtentKind::Oversize => 2,
    }
}

pub fn save<T: Write>(store: &Store, out: &mut T) -> Result<()> {
    let mut w = W(out);
    let cfg = store.config();
    w.0.write_all(MAGIC)?;
    w.u32(VERSION)?;
    w.u32(cfg.block_size)?;
    w.u32(cfg.segment_threshold)?;
    w.u64(cfg.segment_reserve_factor.to_bits())?;
    w.u8(policy_tag(cfg.policy))?;

    // segment table
    w.u64(store.frags.len() as u64)?;
    for e in &store.frags {
        w.u32(e.owner.0)?;
        w.u8(e.live as u8)?;
        w.u32(e.rows)?;
        w.u32(e.width)?;
        match &e.handle {
            Handle::Empty => w.u8(0)?,
            Handle::Segment { ext, off, cap_rows } => {
                w.u8(1)?;
                w.u32(*ext)?;
                w.u32(*off)?;
                w.u32(*cap_rows)?;
            }
            Handle::Blocks { blocks } => {
                w.u8(2)?;
                w.u64(blocks.len() as u64)?;
                for b in blocks {
                    w.u32(*b)?;
                }
            }
            Handle::View { parent, start, len } => {
                w.u8(3)?;
                w.u32(parent.0)?;
                w.u32(*start)?;
                w.u32(*len)?;
            }
        }
    }

    // arena
    let a = &store.arena;
    let (next_base, free_blocks, page, free_segments) = a.raw_parts();
    w.u64(next_base)?;
    w.u64(a.segment_bytes)?;
    w.u64(a.live_blocks)?;
    w.u64(a.extents.len() as u64)?;
    for x in &a.extents {
        w.u64(x.base)?;
        w.u8(kind_tag(x.kind))?;
        w.bytes(&x.data)?;
    }
    w.u64(free_blocks.len() as u64)?;
    for b in free_blocks {
        w.u32(*b)?;
    }
    match page {
        Some((e, used)) => {
            w.u8(1)?;
            w.u32(e)?;
            w.u64(used as u64)?;
        }
        None => w.u8(0)?,
    }
    w.u64(free_segments.len() as u64)?;
    for (cap, list) in free_segments {
        w.u64(*cap as u64)?;
        w.u64(list.len() as u64)?;
        for (e, o) in list {
            w.u32(*e)?;
            w.u32(*o)?;
        }
    }

    // catalog
    w.u64(store.relations.len() as u64)?;
    for r in &store.relations {
        w.str(&r.name)?;
        w.u64(r.schema.columns.len() as u64)?;
        for c in &r.schema.columns {
            w.str(&c.name)?;
            w.u8(c.ty.tag())?;
            if let ColumnType::Ref(t) = c.ty {
                w.u32(t.0)?;
            }
        }
        w.u64(r.fragments.len() as u64)?;
        for f in &r.fragments {
            w.u32(f.0)?;
        }
        w.u64(r.strings.len() as u64)?;
        for s in &r.strings {
            w.str(s)?;
        }
    }
    w.u64(store.direct_index.len() as u64)?;
    let mut idx: Vec<_> = store.direct_index.iter().collect();
    idx.sort();
    for (addr, f) in idx {
        w.u64(*addr)?;
        w.u32(f.0)?;
    }
    Ok(())
}

pub fn load<T: Read>(input: &mut T) -> Result<Store> {
    let mut r = R(input);
    let magic: [u8; 4] = r.fill()?;
    if &magic != MAGIC {
        return Err(StoreError::Snapshot("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(StoreError::Snapshot(format!("unsupported version {version}")));
    }
    let block_size = r.u32()?;
    let segment_threshold = r.u32()?;
    let segment_reserve_factor = f64::from_bits(r.u64()?);
    let policy = match r.u8()? {
        0 => FragmentPolicy::Heterogeneous,
        1 => FragmentPolicy::PureSegment,
        2 => FragmentPolicy::PureBlock,
        t => return Err(StoreError::Snapshot(format!("bad policy tag {t}"))),
    };
    let cfg = StoreConfig { block_size, segment_threshold, segment_reserve_factor, policy };
    cfg.validate()?;

    let nfrag = r.u64()? as usize;
    let mut frags = Vec::with_capacity(nfrag);
    for _ in 0..nfrag {
        let owner = RelId(r.u32()?);
        let live = r.u8()? != 0;
        let rows = r.u32()?;
        let width = r.u32()?;
        let handle = match r.u8()? {
            0 => Handle::Empty,
            1 => Handle::Segment { ext: r.u32()?, off: r.u32()?, cap_rows: r.u32()? },
            2 => {
                let n = r.u64()? as usize;
                let mut blocks = Vec::with_capacity(n);
                for _ in 0..n {
                    blocks.push(r.u32()?);
                }
                Handle::Blocks { blocks }
            }
            3 => Handle::View { parent: FragmentId(r.u32()?), start: r.u32()?, len: r.u32()? },
            t => return Err(StoreError::Snapshot(format!("bad handle tag {t}"))),
        };
        frags.push(FragEntry { owner, handle, rows, width, live });
    }

    let next_base = r.u64()?;
    let segment_bytes = r.u64()?;
    let live_blocks = r.u64()?;
    let next = r.u64()? as usize;
    let mut extents = Vec::with_capacity(next);
    for _ in 0..next {
        let base = r.u64()?;
        let kind = match r.u8()? {
            0 => ExtentKind::Block,
            1 => ExtentKind::SegmentPage,
            2 => ExtentKind::Oversize,
            t => return Err(StoreError::Snapshot(format!("bad extent tag {t}"))),
        };
        let data = r.bytes()?;
        extents.push(Extent { base, kind, data });
    }
    let nfree = r.u64()? as usize;
    let mut free_blocks = Vec::with_capacity(nfree);
    for _ in 0..nfree {
        free_blocks.push(r.u32()?);
    }
    let page = if r.u8()? == 1 { Some((r.u32()?, r.u64()? as usize)) } else { None };
    let nsegs = r.u64()? as usize;
    let mut free_segments = BTreeMap::new();
    for _ in 0..nsegs {
        let cap = r.u64()? as usize;
        let n = r.u64()? as usize;
        let mut list = Vec::with_capacity(n);
        for _ in 0..n {
            list.push((r.u32()?, r.u32()?));
        }
        free_segments.insert(cap, list);
    }
    let arena = Arena::from_raw_parts(
        block_size as usize,
        extents,
        next_base,
        free_blocks,
        page,
        free_segments,
        segment_bytes,
        live_blocks,
    );

    let nrel = r.u64()? as usize;
    let mut relations = Vec::with_capacity(nrel);
    for _ in 0..nrel {
        let name = r.str()?;
        let ncol = r.u64()? as usize;
        let mut cols = Vec::with_capacity(ncol);
        for _ in 0..ncol {
            let cname = r.str()?;
            let ty = match r.u8()? {
                0 => ColumnType::Int,
                1 => ColumnType::Float,
                2 => ColumnType::Bool,
                3 => ColumnType::Str,
                4 => ColumnType::Label,
                5 => ColumnType::Ref(RelId(r.u32()?)),
                t => return Err(StoreError::Snapshot(format!("bad column tag {t}"))),
            };
            cols.push(Column::new(cname, ty));
        }
        let nf = r.u64()? as usize;
        let mut fragments = Vec::with_capacity(nf);
        for _ in 0..nf {
            fragments.push(FragmentId(r.u32()?));
        }
        let ns = r.u64()? as usize;
        let mut strings = Vec::with_capacity(ns);
        for _ in 0..ns {
            strings.push(r.str()?);
        }
        relations.push(ExtendedRelation { name, schema: Schema::new(cols), fragments, strings });
    }
    let nidx = r.u64()? as usize;
    let mut direct_index = HashMap::with_capacity(nidx);
    for _ in 0..nidx {
        let addr = r.u64()?;
        direct_index.insert(addr, FragmentId(r.u32()?));
    }
    Ok(Store::from_parts(cfg, arena, frags, relations, direct_index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::{Cell, RefMode};

    #[test]
    fn roundtrip_keeps_refs_and_rows() {
        let mut s = Store::new(StoreConfig::default()).unwrap();
        let v = s.create_relation("V", vec![Column::new("vid", ColumnType::Int), Column::new("n", ColumnType::Str)]).unwrap();
        let p = s.create_relation("P", vec![Column::new("p", ColumnType::Ref(v))]).unwrap();
        let f = s.insert_fragment(v, &[vec![Cell::from(1), Cell::from("a")], vec![Cell::from(2), Cell::from("b")]]).unwrap();
        let ind = s.make_ref(f, RefMode::Indirect).unwrap();
        let dir = s.make_ref(f, RefMode::Direct).unwrap();
        s.insert_fragment(p, &[vec![Cell::Ref(ind)], vec![Cell::Ref(dir)]]).unwrap();
        let mut buf = Vec::new();
        save(&s, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"RGST");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 65536);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 8192);
        let t = load(&mut buf.as_slice()).unwrap();
        let pid = t.relation_id("P").unwrap();
        for loc in t.scan(pid) {
            let r = t.read_ref(loc, 0).unwrap();
            let view = t.resolve(&r).unwrap();
            let names: Vec<_> = view.iter().map(|l| t.read_plain(l, 1).to_string()).collect();
            assert_eq!(names, vec!["a", "b"]);
        }
        assert_eq!(t.storage_bytes(), s.storage_bytes());
    }

    #[test]
    fn bad_magic_is_rejected() {
        assert!(matches!(load(&mut &b"XXXX\x01\0\0\0"[..]), Err(StoreError::Snapshot(_))));
    }
}
