//! Periodic link patterns: encoding, planarity, translation and sector bases.
//!
//! A pattern assigns every site of a ring of `L` sites one of three states:
//! empty, a through-line (defect), or one end of an arc. Through-lines attach
//! to the inner boundary of the annulus, so an arc must leave all defects on
//! one side. Loops wrapping the annulus and through-line winding both carry
//! the same weight as their trivial counterparts, which makes connectivity
//! the only data a pattern needs.
//!
//! Through-lines may carry an arrow (up by default). Arrows ride along with
//! their line and only matter when two lines are joined.

use std::fmt;
use std::io::Write;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::model::MAX_SITES;

const BITS_PER_SITE: u32 = 5;
const SITE_MASK: u128 = (1 << BITS_PER_SITE) - 1;
/// Site code of a down-arrow through-line; arc codes stop at 2 + 23.
const DOWN_CODE: u128 = 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Site {
    Empty,
    Defect,
    Paired(u8),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinkPattern {
    len: u8,
    sites: [Site; MAX_SITES],
    /// Bit i set: the through-line at site i points down.
    down: u32,
}

impl LinkPattern {
    /// Validating constructor.
    pub fn new(sites: &[Site]) -> Result<Self> {
        let p = Self::from_sites_unchecked(sites)?;
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn from_sites_unchecked(sites: &[Site]) -> Result<Self> {
        if sites.len() < 2 || sites.len() > MAX_SITES {
            return Err(Error::invalid(format!(
                "pattern length {} outside 2..={MAX_SITES}",
                sites.len()
            )));
        }
        let mut buf = [Site::Empty; MAX_SITES];
        buf[..sites.len()].copy_from_slice(sites);
        Ok(LinkPattern {
            len: sites.len() as u8,
            sites: buf,
            down: 0,
        })
    }

    /// Builds a pattern from arcs and defect positions, everything else empty.
    pub fn from_arcs(len: usize, arcs: &[(usize, usize)], defects: &[usize]) -> Result<Self> {
        let mut sites = vec![Site::Empty; len];
        for &(a, b) in arcs {
            if a >= len || b >= len {
                return Err(Error::invalid("arc endpoint out of range"));
            }
            sites[a] = Site::Paired(b as u8);
            sites[b] = Site::Paired(a as u8);
        }
        for &d in defects {
            if d >= len {
                return Err(Error::invalid("defect out of range"));
            }
            sites[d] = Site::Defect;
        }
        Self::new(&sites)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn site(&self, i: usize) -> Site {
        self.sites[i]
    }

    #[inline]
    pub fn sites(&self) -> &[Site] {
        &self.sites[..self.len()]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, s: Site) {
        self.sites[i] = s;
        if s != Site::Defect {
            self.down &= !(1 << i);
        }
    }

    /// Moves the through-line at `from` to the (non-defect) site `to`, arrow included.
    #[inline]
    pub(crate) fn move_defect(&mut self, from: usize, to: usize) {
        let arrow = self.is_down(from);
        self.set(to, Site::Defect);
        if arrow {
            self.down |= 1 << to;
        }
    }

    /// Whether the through-line at `i` points down.
    #[inline]
    pub fn is_down(&self, i: usize) -> bool {
        self.down >> i & 1 == 1
    }

    /// Mask of down arrows.
    pub fn down_mask(&self) -> u32 {
        self.down
    }

    /// Same connectivity with the given down arrows; bits must sit on defects.
    pub fn with_down_mask(&self, mask: u32) -> Result<Self> {
        let defects: u32 = (0..self.len())
            .filter(|&i| self.sites[i] == Site::Defect)
            .fold(0, |m, i| m | 1 << i);
        if mask & !defects != 0 {
            return Err(Error::invalid(format!("arrow mask {mask:#x} off the through-lines of {self}")));
        }
        Ok(LinkPattern { down: mask, ..*self })
    }

    /// Every arrow reversed.
    pub fn flip_arrows(&self) -> Self {
        let defects: u32 = (0..self.len())
            .filter(|&i| self.sites[i] == Site::Defect)
            .fold(0, |m, i| m | 1 << i);
        LinkPattern {
            down: self.down ^ defects,
            ..*self
        }
    }

    /// Number of through-lines.
    pub fn lines(&self) -> usize {
        self.sites().iter().filter(|s| **s == Site::Defect).count()
    }

    pub fn has_vacancies(&self) -> bool {
        self.sites().contains(&Site::Empty)
    }

    /// Bit mask of occupied sites.
    pub fn occupancy(&self) -> u32 {
        let mut m = 0u32;
        for (i, s) in self.sites().iter().enumerate() {
            if *s != Site::Empty {
                m |= 1 << i;
            }
        }
        m
    }

    /// Arcs as (a, b) with a < b.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sites().iter().enumerate().filter_map(|(i, s)| match *s {
            Site::Paired(p) if (p as usize) > i => Some((i, p as usize)),
            _ => None,
        })
    }

    /// Checks the involution, non-crossing and defect-accessibility rules.
    pub fn validate(&self) -> Result<()> {
        let l = self.len();
        if (0..l).any(|i| self.is_down(i) && self.sites[i] != Site::Defect) || self.down >> l != 0 {
            return Err(Error::invalid("arrow on a site without a through-line"));
        }
        for i in 0..l {
            if let Site::Paired(p) = self.sites[i] {
                let p = p as usize;
                if p >= l || p == i {
                    return Err(Error::invalid(format!("site {i} paired to {p}")));
                }
                if self.sites[p] != Site::Paired(i as u8) {
                    return Err(Error::invalid(format!("pairing not an involution at {i}")));
                }
            }
        }
        let arcs: Vec<_> = self.arcs().collect();
        for (x, &(a, b)) in arcs.iter().enumerate() {
            for &(c, d) in &arcs[x + 1..] {
                if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                    return Err(Error::invalid(format!(
                        "arcs ({a},{b}) and ({c},{d}) cross"
                    )));
                }
            }
            let inside = (a + 1..b).any(|k| self.sites[k] == Site::Defect);
            let outside = (0..a)
                .chain(b + 1..l)
                .any(|k| self.sites[k] == Site::Defect);
            if inside && outside {
                return Err(Error::invalid(format!(
                    "arc ({a},{b}) separates through-lines"
                )));
            }
        }
        Ok(())
    }

    /// Packs the pattern: five bits per site, site 0 most significant.
    /// Site codes are 0 empty, 1 defect, 2 + (partner - i mod L) for arcs,
    /// 31 for a down-arrow defect.
    pub fn encode(&self) -> u128 {
        let l = self.len();
        let mut code = 0u128;
        for i in 0..l {
            let v = match self.sites[i] {
                Site::Empty => 0,
                Site::Defect if self.is_down(i) => DOWN_CODE,
                Site::Defect => 1,
                Site::Paired(p) => 2 + ((p as usize + l - i) % l) as u128,
            };
            code = (code << BITS_PER_SITE) | v;
        }
        code
    }

    pub fn decode(len: usize, code: u128) -> Result<Self> {
        if !(2..=MAX_SITES).contains(&len) {
            return Err(Error::invalid(format!("pattern length {len} out of range")));
        }
        let mut sites = [Site::Empty; MAX_SITES];
        let mut down = 0u32;
        for i in 0..len {
            let shift = BITS_PER_SITE * (len - 1 - i) as u32;
            let v = ((code >> shift) & SITE_MASK) as usize;
            sites[i] = match v {
                0 => Site::Empty,
                1 => Site::Defect,
                v if v as u128 == DOWN_CODE => {
                    down |= 1 << i;
                    Site::Defect
                }
                off if off - 2 < len && off > 2 => Site::Paired(((i + off - 2) % len) as u8),
                _ => return Err(Error::invalid(format!("bad site code {v} at {i}"))),
            };
        }
        let p = LinkPattern {
            len: len as u8,
            sites,
            down,
        };
        p.validate()?;
        Ok(p)
    }

    /// Shifts every site by `k` to the right.
    pub fn rotate(&self, k: usize) -> Self {
        let l = self.len();
        let mut out = LinkPattern {
            len: self.len,
            sites: [Site::Empty; MAX_SITES],
            down: 0,
        };
        for i in 0..l {
            if self.is_down(i) {
                out.down |= 1 << ((i + k) % l);
            }
            out.sites[(i + k) % l] = match self.sites[i] {
                Site::Paired(p) => Site::Paired(((p as usize + k) % l) as u8),
                s => s,
            };
        }
        out
    }

    /// The two-site translation u².
    pub fn translate_two(&self) -> Self {
        self.rotate(2)
    }

    /// Orbit representative under u²: returns `(rep, m, d)` with
    /// `self = u^{2m} rep`, `rep` of minimal code and `d` the orbit length.
    pub fn canonical_rotation(&self) -> (LinkPattern, usize, usize) {
        let l = self.len();
        let half = l / 2;
        let code0 = self.encode();
        let mut best = (*self, code0, 0usize);
        let mut q = *self;
        let mut period = half;
        for k in 1..half {
            q = q.translate_two();
            let c = q.encode();
            if c == code0 {
                period = k;
                break;
            }
            if c < best.1 {
                best = (q, c, k);
            }
        }
        // rep = u^{2k} self, so self = u^{2(period - k)} rep
        let m = (period - best.2) % period;
        (best.0, m, period)
    }
}

impl fmt::Debug for LinkPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinkPattern[{self}]")
    }
}

/// `.` empty, `|` defect (`:` pointing down), partner index for an arc end.
impl fmt::Display for LinkPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sites().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match s {
                Site::Empty => f.write_str(".")?,
                Site::Defect if self.is_down(i) => f.write_str(":")?,
                Site::Defect => f.write_str("|")?,
                Site::Paired(p) => write!(f, "{p}")?,
            }
        }
        Ok(())
    }
}

/// Dense-model seed: defects on sites 0..lines, short arcs on the rest.
pub fn seed_pattern(len: usize, lines: usize) -> Result<LinkPattern> {
    if lines > len || !(len - lines).is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "{lines} through-lines incompatible with L = {len}"
        )));
    }
    let mut sites = vec![Site::Defect; len];
    let mut k = lines;
    while k < len {
        sites[k] = Site::Paired((k + 1) as u8);
        sites[k + 1] = Site::Paired(k as u8);
        k += 2;
    }
    LinkPattern::new(&sites)
}

/// Ordered basis of link patterns with a fixed number of through-lines.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    len: usize,
    lines: usize,
    patterns: Vec<LinkPattern>,
    codes: Vec<u128>,
    index: FxHashMap<u128, usize>,
}

impl SectorBasis {
    /// Sorts by canonical code and indexes; rejects duplicates and mixed sectors.
    pub fn from_patterns(len: usize, lines: usize, mut patterns: Vec<LinkPattern>) -> Result<Self> {
        patterns.sort_by_key(|p| p.encode());
        let codes: Vec<u128> = patterns.iter().map(|p| p.encode()).collect();
        let mut index = FxHashMap::default();
        index.reserve(codes.len());
        for (k, (&c, p)) in codes.iter().zip(&patterns).enumerate() {
            if p.len() != len || p.lines() != lines {
                return Err(Error::invalid(format!("pattern {p} not in sector")));
            }
            if index.insert(c, k).is_some() {
                return Err(Error::invalid(format!("duplicate pattern {p}")));
            }
        }
        Ok(SectorBasis {
            len,
            lines,
            patterns,
            codes,
            index,
        })
    }

    /// Closure of `seeds` under `step`, keeping only outputs with the seed's line count.
    pub fn closure<F>(len: usize, lines: usize, seeds: &[LinkPattern], mut step: F) -> Result<Self>
    where
        F: FnMut(&LinkPattern, &mut Vec<LinkPattern>),
    {
        let mut seen: FxHashMap<u128, ()> = FxHashMap::default();
        let mut stack = Vec::new();
        let mut found = Vec::new();
        for s in seeds {
            if seen.insert(s.encode(), ()).is_none() {
                stack.push(*s);
                found.push(*s);
            }
        }
        let mut out = Vec::new();
        while let Some(p) = stack.pop() {
            out.clear();
            step(&p, &mut out);
            for q in &out {
                if q.lines() != lines {
                    continue;
                }
                if seen.insert(q.encode(), ()).is_none() {
                    stack.push(*q);
                    found.push(*q);
                }
            }
        }
        Self::from_patterns(len, lines, found)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn sites(&self) -> usize {
        self.len
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    pub fn patterns(&self) -> &[LinkPattern] {
        &self.patterns
    }

    pub fn pattern(&self, k: usize) -> &LinkPattern {
        &self.patterns[k]
    }

    pub fn codes(&self) -> &[u128] {
        &self.codes
    }

    pub fn index_of(&self, p: &LinkPattern) -> Option<usize> {
        self.index.get(&p.encode()).copied()
    }

    pub fn index_of_code(&self, code: u128) -> Option<usize> {
        self.index.get(&code).copied()
    }

    /// Writes one pattern per line: hex code, then the readable form.
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (c, p) in self.codes.iter().zip(&self.patterns) {
            writeln!(w, "{c:032x}  {p}")?;
        }
        Ok(())
    }
}
