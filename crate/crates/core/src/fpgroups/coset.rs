//! Coset enumeration and subgroup rewriting.
//!
//! Todd-Coxeter in the HLT flavor: relator scans define new cosets to fill
//! gaps, coincidences are processed through a union-find merge queue, and a
//! lookahead pass (scans without definitions) compresses the table whenever
//! the definition count crosses a growing threshold. The budget is a hard
//! cap on defined cosets; exceeding it is a resource error, never a wrong
//! answer. Completed tables are standardized by breadth-first renumbering,
//! which makes them canonical for the fixed generator order.

use super::presentation::Presentation;
use super::word::{concat, inverse, reduce_word, Word};
use crate::error::{Error, Result};

const UNDEF: u32 = u32::MAX;

fn slot(letter: i32) -> usize {
    if letter > 0 {
        2 * (letter as usize - 1)
    } else {
        2 * ((-letter) as usize - 1) + 1
    }
}

fn inv_slot(s: usize) -> usize {
    s ^ 1
}

#[derive(Debug, Clone)]
pub struct CosetTable {
    pres: Presentation,
    subgroup_gens: Vec<Word>,
    ncols: usize,
    /// table[c * ncols + s], complete after enumeration
    table: Vec<u32>,
    index: usize,
}

struct Enumerator {
    ncols: usize,
    table: Vec<u32>,
    parent: Vec<u32>,
    ndefined: usize,
    nalive: usize,
    max_cosets: usize,
}

impl Enumerator {
    fn new(ncols: usize, max_cosets: usize) -> Self {
        let mut e = Enumerator {
            ncols,
            table: Vec::new(),
            parent: Vec::new(),
            ndefined: 0,
            nalive: 0,
            max_cosets,
        };
        e.define_raw();
        e
    }

    fn define_raw(&mut self) -> u32 {
        let id = self.ndefined as u32;
        self.table.extend(std::iter::repeat_n(UNDEF, self.ncols));
        self.parent.push(id);
        self.ndefined += 1;
        self.nalive += 1;
        id
    }

    fn get(&self, c: u32, s: usize) -> Option<u32> {
        let v = self.table[c as usize * self.ncols + s];
        (v != UNDEF).then_some(v)
    }

    fn set_raw(&mut self, c: u32, s: usize, v: u32) {
        self.table[c as usize * self.ncols + s] = v;
    }

    fn find(&mut self, mut c: u32) -> u32 {
        while self.parent[c as usize] != c {
            let p = self.parent[c as usize];
            self.parent[c as usize] = self.parent[p as usize];
            c = self.parent[c as usize];
        }
        c
    }

    /// Install edge x --s--> y (both directions), queueing coincidences.
    fn deduce(&mut self, x: u32, s: usize, y: u32, queue: &mut Vec<(u32, u32)>) {
        let x = self.find(x);
        let y = self.find(y);
        match self.get(x, s) {
            Some(e) => {
                queue.push((e, y));
            }
            None => {
                self.set_raw(x, s, y);
                match self.get(y, inv_slot(s)) {
                    Some(e2) => {
                        if self.find(e2) != x {
                            queue.push((e2, x));
                        }
                    }
                    None => self.set_raw(y, inv_slot(s), x),
                }
            }
        }
        self.drain_coincidences(queue);
    }

    fn drain_coincidences(&mut self, queue: &mut Vec<(u32, u32)>) {
        while let Some((a, b)) = queue.pop() {
            let a = self.find(a);
            let b = self.find(b);
            if a == b {
                continue;
            }
            let (keep, kill) = if a < b { (a, b) } else { (b, a) };
            self.parent[kill as usize] = keep;
            self.nalive -= 1;
            for s in 0..self.ncols {
                let Some(d) = self.get(kill, s) else { continue };
                // drop the reverse pointer into the dying coset
                if self.get(d, inv_slot(s)) == Some(kill) {
                    self.set_raw(d, inv_slot(s), UNDEF);
                }
                let d = self.find(d);
                let keep = self.find(keep);
                match self.get(keep, s) {
                    Some(e) => queue.push((e, d)),
                    None => {
                        self.set_raw(keep, s, d);
                        match self.get(d, inv_slot(s)) {
                            Some(e2) => {
                                if self.find(e2) != keep {
                                    queue.push((e2, keep));
                                }
                            }
                            None => self.set_raw(d, inv_slot(s), keep),
                        }
                    }
                }
            }
        }
    }

    /// Scan relator w from coset c. With `fill`, gaps of length one become
    /// deductions and longer gaps define new cosets (HLT); without `fill`,
    /// only forced coincidences and single-gap deductions are applied.
    fn scan(&mut self, c: u32, w: &[i32], fill: bool) -> Result<()> {
        let mut queue = Vec::new();
        loop {
            let c = self.find(c);
            let mut f = c;
            let mut i = 0;
            while i < w.len() {
                match self.get(f, slot(w[i])) {
                    Some(x) => {
                        f = self.find(x);
                        i += 1;
                    }
                    None => break,
                }
            }
            if i == w.len() {
                if f != c {
                    queue.push((f, c));
                    self.drain_coincidences(&mut queue);
                }
                return Ok(());
            }
            let mut b = c;
            let mut j = w.len();
            while j > i {
                match self.get(b, inv_slot(slot(w[j - 1]))) {
                    Some(x) => {
                        b = self.find(x);
                        j -= 1;
                    }
                    None => break,
                }
            }
            if j == i {
                if f != b {
                    queue.push((f, b));
                    self.drain_coincidences(&mut queue);
                }
                return Ok(());
            }
            if j == i + 1 {
                self.deduce(f, slot(w[i]), b, &mut queue);
                return Ok(());
            }
            if !fill {
                return Ok(());
            }
            if self.ndefined >= self.max_cosets {
                return Err(Error::resource(format!(
                    "coset enumeration exceeded max_cosets = {}",
                    self.max_cosets
                )));
            }
            let d = self.define_raw();
            self.deduce(f, slot(w[i]), d, &mut queue);
            // loop: the forward scan now gets further
        }
    }

    fn alive(&mut self, c: u32) -> bool {
        self.find(c) == c
    }
}

/// Enumerate the cosets of the subgroup generated by `subgroup_gens`.
pub fn todd_coxeter(
    pres: &Presentation,
    subgroup_gens: &[Word],
    max_cosets: usize,
) -> Result<CosetTable> {
    let ncols = 2 * pres.ngens().max(1);
    let mut e = Enumerator::new(ncols, max_cosets);
    for w in subgroup_gens {
        e.scan(0, &reduce_word(w), true)?;
    }
    let mut next_lookahead = 4096usize;
    let mut c: u32 = 0;
    while (c as usize) < e.ndefined {
        if !e.alive(c) {
            c += 1;
            continue;
        }
        for r in pres.relators().to_vec() {
            e.scan(c, &r, true)?;
            if !e.alive(c) {
                break;
            }
        }
        if e.alive(c) {
            for s in 0..ncols {
                let cc = e.find(c);
                if e.get(cc, s).is_none() {
                    if e.ndefined >= max_cosets {
                        return Err(Error::resource(format!(
                            "coset enumeration exceeded max_cosets = {max_cosets}"
                        )));
                    }
                    let d = e.define_raw();
                    let mut q = Vec::new();
                    let cc = e.find(c);
                    e.deduce(cc, s, d, &mut q);
                }
            }
        }
        if e.ndefined > next_lookahead {
            // lookahead: re-scan live cosets without defining, to collapse
            // coincidences before spending more of the budget
            let snapshot = e.ndefined as u32;
            for lc in 0..snapshot {
                if e.alive(lc) {
                    for r in pres.relators().to_vec() {
                        e.scan(lc, &r, false)?;
                    }
                }
            }
            next_lookahead *= 2;
        }
        c += 1;
    }

    // compact and standardize: breadth-first renumbering from coset 0
    let root = e.find(0);
    let mut new_id = vec![UNDEF; e.ndefined];
    let mut order: Vec<u32> = Vec::new();
    new_id[root as usize] = 0;
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let c = order[head];
        head += 1;
        for s in 0..ncols {
            if let Some(d) = e.get(c, s) {
                let d = e.find(d);
                if new_id[d as usize] == UNDEF {
                    new_id[d as usize] = order.len() as u32;
                    order.push(d);
                }
            }
        }
    }
    let index = order.len();
    if index != e.nalive {
        return Err(Error::verification(
            "coset-table-transitive",
            format!("enumeration left {} live cosets, BFS reached {index}", e.nalive),
        ));
    }
    let mut table = vec![UNDEF; index * ncols];
    for (ni, &oc) in order.iter().enumerate() {
        for s in 0..ncols {
            let d = e
                .get(oc, s)
                .map(|d| e.find(d))
                .ok_or_else(|| Error::verification("coset-table-complete", "undefined entry"))?;
            table[ni * ncols + s] = new_id[d as usize];
        }
    }
    let t = CosetTable {
        pres: pres.clone(),
        subgroup_gens: subgroup_gens.to_vec(),
        ncols,
        table,
        index,
    };
    t.validate()?;
    Ok(t)
}

impl CosetTable {
    /// Table with rows supplied directly (cosets x slots, slot 2g for
    /// generator g, 2g+1 for its inverse). Used for kernels of quotient
    /// maps, where the coset action is just group multiplication.
    pub fn from_action(
        pres: &Presentation,
        subgroup_gens: Vec<Word>,
        rows: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let ncols = 2 * pres.ngens().max(1);
        let index = rows.len();
        let mut table = Vec::with_capacity(index * ncols);
        for r in &rows {
            if r.len() != ncols {
                return Err(Error::invalid("coset table row width mismatch"));
            }
            table.extend_from_slice(r);
        }
        let t = CosetTable {
            pres: pres.clone(),
            subgroup_gens,
            ncols,
            table,
            index,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn subgroup_gens(&self) -> &[Word] {
        &self.subgroup_gens
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn act(&self, c: u32, letter: i32) -> u32 {
        self.table[c as usize * self.ncols + slot(letter)]
    }

    pub fn act_word(&self, mut c: u32, w: &[i32]) -> u32 {
        for &l in w {
            c = self.act(c, l);
        }
        c
    }

    /// Full check: completeness, inverse consistency, every relator traces
    /// to its starting coset from every coset, transitivity.
    pub fn validate(&self) -> Result<()> {
        for c in 0..self.index as u32 {
            for s in 0..self.ncols {
                let d = self.table[c as usize * self.ncols + s];
                if d == UNDEF || d as usize >= self.index {
                    return Err(Error::verification(
                        "coset-table-complete",
                        format!("entry ({c},{s}) undefined or out of range"),
                    ));
                }
                if self.table[d as usize * self.ncols + inv_slot(s)] != c {
                    return Err(Error::verification(
                        "coset-table-inverse",
                        format!("entry ({c},{s}) -> {d} lacks inverse edge"),
                    ));
                }
            }
        }
        for c in 0..self.index as u32 {
            for (ri, r) in self.pres.relators().iter().enumerate() {
                if self.act_word(c, r) != c {
                    return Err(Error::verification(
                        "coset-table-relator",
                        format!("relator #{ri} does not fix coset {c}"),
                    ));
                }
            }
        }
        for w in &self.subgroup_gens {
            if self.act_word(0, w) != 0 {
                return Err(Error::verification(
                    "coset-table-subgroup",
                    "subgroup generator moves coset 0",
                ));
            }
        }
        // transitivity
        let mut seen = vec![false; self.index];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(c) = stack.pop() {
            for s in 0..self.ncols {
                let d = self.table[c as usize * self.ncols + s] as usize;
                if !seen[d] {
                    seen[d] = true;
                    count += 1;
                    stack.push(d as u32);
                }
            }
        }
        if count != self.index {
            return Err(Error::verification(
                "coset-table-transitive",
                "action is not transitive",
            ));
        }
        Ok(())
    }

    /// Breadth-first spanning tree: shortlex representative words and the
    /// Schreier generators of the subgroup on the non-tree edges.
    pub fn schreier(&self) -> SchreierData {
        let mut reps: Vec<Word> = vec![Word::new(); self.index];
        let mut visited = vec![false; self.index];
        let mut tree_edge = vec![false; self.index * self.ncols];
        visited[0] = true;
        let mut order = vec![0u32];
        let mut head = 0;
        while head < order.len() {
            let c = order[head];
            head += 1;
            for s in 0..self.ncols {
                let d = self.table[c as usize * self.ncols + s];
                if !visited[d as usize] {
                    visited[d as usize] = true;
                    tree_edge[c as usize * self.ncols + s] = true;
                    tree_edge[d as usize * self.ncols + inv_slot(s)] = true;
                    let letter = if s % 2 == 0 {
                        (s / 2 + 1) as i32
                    } else {
                        -((s / 2 + 1) as i32)
                    };
                    let mut w = reps[c as usize].clone();
                    w.push(letter);
                    reps[d as usize] = reduce_word(&w);
                    order.push(d);
                }
            }
        }
        // Schreier generators: positive generator slots off the tree
        let mut index_of = vec![usize::MAX; self.index * self.pres.ngens()];
        let mut gens: Vec<Word> = Vec::new();
        let mut at = Vec::new();
        for c in 0..self.index as u32 {
            for g in 0..self.pres.ngens() {
                let s = 2 * g;
                if tree_edge[c as usize * self.ncols + s] {
                    continue;
                }
                let d = self.table[c as usize * self.ncols + s];
                let w = reduce_word(&concat(
                    &concat(&reps[c as usize], &[(g + 1) as i32]),
                    &inverse(&reps[d as usize]),
                ));
                if w.is_empty() {
                    // freely trivial, treat as a tree-like edge
                    continue;
                }
                index_of[c as usize * self.pres.ngens() + g] = gens.len();
                at.push((c, g));
                gens.push(w);
            }
        }
        SchreierData {
            ncols: self.ncols,
            ngens: self.pres.ngens(),
            reps,
            index_of,
            schreier_words: gens,
        }
    }

    /// Presentation of the subgroup on its Schreier generators.
    pub fn rewrite_subgroup(&self) -> Presentation {
        let sd = self.schreier();
        let names: Vec<String> = (0..sd.schreier_words.len())
            .map(|i| format!("s{i}"))
            .collect();
        let mut relators = Vec::new();
        for c in 0..self.index as u32 {
            for r in self.pres.relators() {
                let w = sd.rewrite_from(self, c, r);
                let w = reduce_word(&w);
                if !w.is_empty() {
                    relators.push(w);
                }
            }
        }
        Presentation::new(names, relators).expect("rewritten relators are in range")
    }
}

#[derive(Debug, Clone)]
pub struct SchreierData {
    ncols: usize,
    ngens: usize,
    /// shortlex representative word per coset
    pub reps: Vec<Word>,
    index_of: Vec<usize>,
    /// Schreier generator words (in the ambient generators)
    pub schreier_words: Vec<Word>,
}

impl SchreierData {
    pub fn gen_count(&self) -> usize {
        self.schreier_words.len()
    }

    /// Rewrite a word starting at coset c into Schreier generators (letters
    /// are 1-based indices into `schreier_words`). The trace must return to
    /// c for the result to represent a subgroup element.
    pub fn rewrite_from(&self, table: &CosetTable, c: u32, w: &[i32]) -> Word {
        let _ = self.ncols;
        let mut out = Word::new();
        let mut cur = c;
        for &l in w {
            if l > 0 {
                let g = (l - 1) as usize;
                let idx = self.index_of[cur as usize * self.ngens + g];
                if idx != usize::MAX {
                    out.push((idx + 1) as i32);
                }
                cur = table.act(cur, l);
            } else {
                let g = ((-l) - 1) as usize;
                let d = table.act(cur, l);
                let idx = self.index_of[d as usize * self.ngens + g];
                if idx != usize::MAX {
                    out.push(-((idx + 1) as i32));
                }
                cur = d;
            }
        }
        out
    }

    /// Rewrite a subgroup element (a word fixing coset 0) into Schreier
    /// generators.
    pub fn rewrite(&self, table: &CosetTable, w: &[i32]) -> crate::error::Result<Word> {
        if table.act_word(0, w) != 0 {
            return Err(Error::invalid(
                "rewrite: word does not lie in the subgroup",
            ));
        }
        Ok(self.rewrite_from(table, 0, w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpgroups::word::commutator;

    fn z2_pres() -> Presentation {
        // ⟨a, b | [a,b]⟩ = ℤ²
        Presentation::new(
            vec!["a".into(), "b".into()],
            vec![commutator(&[1], &[2])],
        )
        .unwrap()
    }

    #[test]
    fn index_two_subgroup_of_z2() {
        let t = todd_coxeter(&z2_pres(), &[vec![1, 1], vec![2]], 1000).unwrap();
        assert_eq!(t.index(), 2);
    }

    #[test]
    fn whole_group_has_index_one() {
        let t = todd_coxeter(&z2_pres(), &[vec![1], vec![2]], 1000).unwrap();
        assert_eq!(t.index(), 1);
    }

    #[test]
    fn index_four_sublattice() {
        // ⟨a², b², [a,b]⟩ inside ℤ² has index 4
        let t = todd_coxeter(
            &z2_pres(),
            &[vec![1, 1], vec![2, 2], commutator(&[1], &[2])],
            1000,
        )
        .unwrap();
        assert_eq!(t.index(), 4);
    }

    #[test]
    fn s3_from_presentation() {
        // ⟨a, b | a², b², (ab)³⟩, trivial subgroup: index 6
        let p = Presentation::new(
            vec!["a".into(), "b".into()],
            vec![vec![1, 1], vec![2, 2], vec![1, 2, 1, 2, 1, 2]],
        )
        .unwrap();
        let t = todd_coxeter(&p, &[], 1000).unwrap();
        assert_eq!(t.index(), 6);
        // subgroup generated by a transposition: index 3
        let t = todd_coxeter(&p, &[vec![1]], 1000).unwrap();
        assert_eq!(t.index(), 3);
    }

    #[test]
    fn budget_is_respected() {
        let p = Presentation::surface(2);
        let err = todd_coxeter(&p, &[], 100).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn rewrite_index_two_subgroup_of_z2_is_z2() {
        // subgroup ⟨a², b⟩ of ℤ²: abelianization must be ℤ²
        let t = todd_coxeter(&z2_pres(), &[vec![1, 1], vec![2]], 1000).unwrap();
        let sub = t.rewrite_subgroup();
        let m = crate::linalg::LambdaModule::from_relations(
            4,
            sub.ngens(),
            &sub.abelianized_relators()
                .iter()
                .map(|r| r.iter().map(|&v| v.rem_euclid(4) as u64).collect())
                .collect::<Vec<_>>(),
        );
        // free of rank 2 means (ℤ/4)² after reduction, any extra Schreier
        // generators must be consequences
        assert_eq!(m.orders(), &[4, 4]);
    }

    #[test]
    fn rewrite_index_four_sublattice_is_z2() {
        let t = todd_coxeter(
            &z2_pres(),
            &[vec![1, 1], vec![2, 2], commutator(&[1], &[2])],
            1000,
        )
        .unwrap();
        let sub = t.rewrite_subgroup();
        let m = crate::linalg::LambdaModule::from_relations(
            9,
            sub.ngens(),
            &sub.abelianized_relators()
                .iter()
                .map(|r| r.iter().map(|&v| v.rem_euclid(9) as u64).collect())
                .collect::<Vec<_>>(),
        );
        assert_eq!(m.orders(), &[9, 9]);
    }

    #[test]
    fn nielsen_schreier_rank_for_free_groups() {
        // index-d subgroups of F_r are free of rank d(r-1)+1; check the
        // abelianization rank of the rewritten presentation
        for r in 1..=3usize {
            let p = Presentation::free(r);
            for d in 1..=8usize {
                // kernel of F_r -> Z/d sending x0 -> 1, rest -> 0, as a
                // subgroup: generated by x0^d and all x0^a xj x0^-a
                let mut gens: Vec<Word> = vec![vec![1i32; d]];
                for g in 2..=r as i32 {
                    for a in 0..d {
                        let mut w: Word = vec![1; a];
                        w.push(g);
                        w.extend(std::iter::repeat_n(-1, a));
                        gens.push(w);
                    }
                }
                let t = todd_coxeter(&p, &gens, 10_000).unwrap();
                assert_eq!(t.index(), d);
                let sub = t.rewrite_subgroup();
                let expect = d * (r - 1) + 1;
                // free group: no relators survive reduction
                assert_eq!(sub.ngens(), expect, "r={r} d={d}");
                assert!(sub.relators().iter().all(|w| w.is_empty()) || sub.relators().is_empty());
            }
        }
    }
}
