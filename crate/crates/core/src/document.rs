//! The curve description document: a line-oriented key-value format with
//! sections. Parse errors carry line and column. The grammar is documented
//! in docs/format.md; in short:
//!
//! ```text
//! [curve]
//! component <id> genus=<int> punctures=<int> [marked=<lab>,<lab>,…]
//! point <id> = <comp>:<label> <comp>:<label> …
//!
//! [base]
//! kind = separably-closed | finite-field
//! frobenius <gen> = <word>            # word: gen names, ^-1 for inverses
//! frobenius-stalk = [[…],[…]]
//!
//! [sheaf]
//! modulus = <n>
//! stalk = <d1> <d2> …                  # empty for the zero sheaf
//! monodromy <gen> = [[…],[…]]          # defaults to the identity
//!
//! [limits]
//! max-cosets | max-group-order | max-system-entries = <int>
//! ```

use std::collections::BTreeMap;

use crate::curves::{BaseKind, BranchRef, Component, CurveModel, SingularPoint};
use crate::error::{Error, Result};
use crate::fpgroups::Word;
use crate::limits::Limits;
use crate::linalg::{LambdaMatrix, LambdaModule};
use crate::sheafcohom::LisseSheaf;

#[derive(Debug, Clone)]
pub struct CurveDocument {
    pub curve: CurveModel,
    pub modulus: u64,
    pub stalk_orders: Vec<u64>,
    /// monodromy by generator name (validated against the presentation)
    pub monodromy: BTreeMap<String, Vec<Vec<u64>>>,
    pub frobenius_words: BTreeMap<String, Vec<(String, bool)>>,
    pub frobenius_stalk: Option<Vec<Vec<u64>>>,
    pub limits: Limits,
    /// canonical re-serialization used for cache keys
    pub canonical: String,
}

fn err_at(path: &str, line: usize, col: usize, msg: impl std::fmt::Display) -> Error {
    Error::invalid(format!("{path}:{line}:{col}: {msg}"))
}

fn parse_matrix(path: &str, line_no: usize, s: &str) -> Result<Vec<Vec<u64>>> {
    // [[1,0],[0,1]] with optional spaces
    let s = s.trim();
    if !s.starts_with("[[") || !s.ends_with("]]") {
        if s == "[]" || s == "[[]]" {
            return Ok(vec![]);
        }
        return Err(err_at(path, line_no, 1, "matrix must look like [[1,0],[0,1]]"));
    }
    let inner = &s[2..s.len() - 2];
    let mut rows = Vec::new();
    for part in inner.split("],[") {
        let mut row = Vec::new();
        for entry in part.split(',') {
            let entry = entry.trim();
            if entry.is_empty() {
                continue;
            }
            row.push(entry.parse::<u64>().map_err(|_| {
                err_at(path, line_no, 1, format!("bad matrix entry '{entry}'"))
            })?);
        }
        rows.push(row);
    }
    Ok(rows)
}

impl CurveDocument {
    pub fn parse(path: &str, text: &str) -> Result<CurveDocument> {
        let mut section = String::new();
        let mut components: Vec<Component> = Vec::new();
        let mut points: Vec<(usize, String, Vec<(String, String)>)> = Vec::new();
        let mut kind = BaseKind::SeparablyClosed;
        let mut modulus: Option<u64> = None;
        let mut stalk: Option<Vec<u64>> = None;
        let mut monodromy = BTreeMap::new();
        let mut frobenius_words = BTreeMap::new();
        let mut frobenius_stalk = None;
        let mut limits = Limits::default();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(err_at(path, line_no, line.len(), "unterminated section header"));
                }
                section = line[1..line.len() - 1].to_string();
                if !["curve", "base", "sheaf", "limits"].contains(&section.as_str()) {
                    return Err(err_at(
                        path,
                        line_no,
                        2,
                        format!("unknown section '{section}'"),
                    ));
                }
                continue;
            }
            match section.as_str() {
                "curve" => {
                    if let Some(rest) = line.strip_prefix("component ") {
                        let mut id = None;
                        let mut genus = None;
                        let mut punctures = 0u64;
                        let mut marked = Vec::new();
                        for (wi, w) in rest.split_whitespace().enumerate() {
                            if wi == 0 {
                                id = Some(w.to_string());
                            } else if let Some(v) = w.strip_prefix("genus=") {
                                genus = Some(v.parse().map_err(|_| {
                                    err_at(path, line_no, 1, format!("bad genus '{v}'"))
                                })?);
                            } else if let Some(v) = w.strip_prefix("punctures=") {
                                punctures = v.parse().map_err(|_| {
                                    err_at(path, line_no, 1, format!("bad punctures '{v}'"))
                                })?;
                            } else if let Some(v) = w.strip_prefix("marked=") {
                                marked = v
                                    .split(',')
                                    .filter(|s| !s.is_empty())
                                    .map(|s| s.to_string())
                                    .collect();
                            } else {
                                return Err(err_at(
                                    path,
                                    line_no,
                                    1,
                                    format!("unknown component attribute '{w}'"),
                                ));
                            }
                        }
                        let id = id
                            .ok_or_else(|| err_at(path, line_no, 1, "component needs an id"))?;
                        let genus = genus.ok_or_else(|| {
                            err_at(path, line_no, 1, "component needs genus=<int>")
                        })?;
                        components.push(Component {
                            id,
                            genus,
                            punctures,
                            marked,
                        });
                    } else if let Some(rest) = line.strip_prefix("point ") {
                        let (pid, branches_str) = rest.split_once('=').ok_or_else(|| {
                            err_at(path, line_no, 1, "point needs '= <comp>:<label> …'")
                        })?;
                        let mut branches = Vec::new();
                        for b in branches_str.split_whitespace() {
                            let (c, m) = b.split_once(':').ok_or_else(|| {
                                err_at(path, line_no, 1, format!("branch '{b}' must be comp:label"))
                            })?;
                            branches.push((c.to_string(), m.to_string()));
                        }
                        points.push((line_no, pid.trim().to_string(), branches));
                    } else {
                        return Err(err_at(path, line_no, 1, format!("unknown curve entry '{line}'")));
                    }
                }
                "base" => {
                    if let Some(v) = line.strip_prefix("kind") {
                        let v = v.trim_start_matches([' ', '=']).trim();
                        kind = match v {
                            "separably-closed" => BaseKind::SeparablyClosed,
                            "finite-field" => BaseKind::FiniteField,
                            other => {
                                return Err(err_at(
                                    path,
                                    line_no,
                                    1,
                                    format!("unknown base kind '{other}'"),
                                ))
                            }
                        };
                    } else if let Some(rest) = line.strip_prefix("frobenius-stalk") {
                        let v = rest.trim_start_matches([' ', '=']).trim();
                        frobenius_stalk = Some(parse_matrix(path, line_no, v)?);
                    } else if let Some(rest) = line.strip_prefix("frobenius ") {
                        let (g, w) = rest.split_once('=').ok_or_else(|| {
                            err_at(path, line_no, 1, "frobenius needs '<gen> = <word>'")
                        })?;
                        let mut word = Vec::new();
                        for tok in w.split_whitespace() {
                            let (name, inv) = match tok.strip_suffix("^-1") {
                                Some(n) => (n, true),
                                None => (tok, false),
                            };
                            word.push((name.to_string(), inv));
                        }
                        frobenius_words.insert(g.trim().to_string(), word);
                    } else {
                        return Err(err_at(path, line_no, 1, format!("unknown base entry '{line}'")));
                    }
                }
                "sheaf" => {
                    if let Some(rest) = line.strip_prefix("modulus") {
                        let v = rest.trim_start_matches([' ', '=']).trim();
                        modulus = Some(v.parse().map_err(|_| {
                            err_at(path, line_no, 1, format!("bad modulus '{v}'"))
                        })?);
                    } else if let Some(rest) = line.strip_prefix("stalk") {
                        let v = rest.trim_start_matches([' ', '=']).trim();
                        let mut orders = Vec::new();
                        for tok in v.split_whitespace() {
                            orders.push(tok.parse::<u64>().map_err(|_| {
                                err_at(path, line_no, 1, format!("bad stalk order '{tok}'"))
                            })?);
                        }
                        stalk = Some(orders);
                    } else if let Some(rest) = line.strip_prefix("monodromy ") {
                        let (g, m) = rest.split_once('=').ok_or_else(|| {
                            err_at(path, line_no, 1, "monodromy needs '<gen> = [[…]]'")
                        })?;
                        monodromy.insert(
                            g.trim().to_string(),
                            parse_matrix(path, line_no, m.trim())?,
                        );
                    } else {
                        return Err(err_at(
                            path,
                            line_no,
                            1,
                            format!("unknown sheaf entry '{line}'"),
                        ));
                    }
                }
                "limits" => {
                    let (k, v) = line.split_once('=').ok_or_else(|| {
                        err_at(path, line_no, 1, "limits entries are key = value")
                    })?;
                    let v: u64 = v.trim().parse().map_err(|_| {
                        err_at(path, line_no, 1, format!("bad limit value '{}'", v.trim()))
                    })?;
                    match k.trim() {
                        "max-cosets" => limits.max_cosets = v,
                        "max-group-order" => limits.max_group_order = v,
                        "max-system-entries" => limits.max_system_entries = v,
                        other => {
                            return Err(err_at(
                                path,
                                line_no,
                                1,
                                format!("unknown limit '{other}'"),
                            ))
                        }
                    }
                }
                "" => {
                    return Err(err_at(
                        path,
                        line_no,
                        1,
                        "content before the first section header",
                    ))
                }
                _ => unreachable!(),
            }
        }

        if components.is_empty() {
            return Err(err_at(path, 1, 1, "document defines no components"));
        }
        // resolve branches
        let comp_index: BTreeMap<&str, usize> = components
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.as_str(), i))
            .collect();
        let mut singular = Vec::new();
        for (line_no, _pid, branch_strs) in &points {
            let mut branches = Vec::new();
            for (c, m) in branch_strs {
                let &ci = comp_index.get(c.as_str()).ok_or_else(|| {
                    err_at(path, *line_no, 1, format!("unknown component '{c}'"))
                })?;
                let mi = components[ci].marked.iter().position(|x| x == m).ok_or_else(
                    || {
                        err_at(
                            path,
                            *line_no,
                            1,
                            format!("unknown marked point '{m}' on component '{c}'"),
                        )
                    },
                )?;
                branches.push(BranchRef {
                    component: ci,
                    point: mi,
                });
            }
            singular.push(SingularPoint { branches });
        }
        let curve = CurveModel::new(components, singular, kind);
        curve.validate().map_err(|e| {
            Error::invalid(format!("{path}: invalid curve: {e}"))
        })?;
        let modulus = modulus.ok_or_else(|| err_at(path, 1, 1, "[sheaf] needs modulus = n"))?;
        if modulus < 2 {
            return Err(err_at(path, 1, 1, "modulus must be at least 2"));
        }
        let stalk_orders = stalk.unwrap_or_else(|| vec![modulus]);
        for &d in &stalk_orders {
            if d < 2 || modulus % d != 0 {
                return Err(err_at(
                    path,
                    1,
                    1,
                    format!("stalk order {d} must divide the modulus {modulus}"),
                ));
            }
        }
        let mut doc = CurveDocument {
            curve,
            modulus,
            stalk_orders,
            monodromy,
            frobenius_words,
            frobenius_stalk,
            limits,
            canonical: String::new(),
        };
        doc.canonical = doc.canonical_form();
        // the sheaf must actually build (validates generator names and
        // relator compatibility)
        doc.sheaf()?;
        if doc.curve.base == BaseKind::FiniteField {
            doc.frobenius()?;
        }
        Ok(doc)
    }

    pub fn parse_file(path: &std::path::Path) -> Result<CurveDocument> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&path.display().to_string(), &text)
    }

    /// Canonical re-serialization: fixed entry order, used for cache keys
    /// and determinism checks.
    pub fn canonical_form(&self) -> String {
        let mut out = String::new();
        out.push_str("[curve]\n");
        for c in &self.curve.components {
            out.push_str(&format!(
                "component {} genus={} punctures={} marked={}\n",
                c.id,
                c.genus,
                c.punctures,
                c.marked.join(",")
            ));
        }
        for (i, s) in self.curve.singular.iter().enumerate() {
            let branches: Vec<String> = s
                .branches
                .iter()
                .map(|b| {
                    format!(
                        "{}:{}",
                        self.curve.components[b.component].id,
                        self.curve.components[b.component].marked[b.point]
                    )
                })
                .collect();
            out.push_str(&format!("point p{i} = {}\n", branches.join(" ")));
        }
        out.push_str("[base]\n");
        out.push_str(&format!(
            "kind = {}\n",
            match self.curve.base {
                BaseKind::SeparablyClosed => "separably-closed",
                BaseKind::FiniteField => "finite-field",
            }
        ));
        for (g, w) in &self.frobenius_words {
            let word: Vec<String> = w
                .iter()
                .map(|(n, inv)| if *inv { format!("{n}^-1") } else { n.clone() })
                .collect();
            out.push_str(&format!("frobenius {g} = {}\n", word.join(" ")));
        }
        if let Some(m) = &self.frobenius_stalk {
            out.push_str(&format!("frobenius-stalk = {}\n", fmt_matrix(m)));
        }
        out.push_str("[sheaf]\n");
        out.push_str(&format!("modulus = {}\n", self.modulus));
        let orders: Vec<String> = self.stalk_orders.iter().map(|d| d.to_string()).collect();
        out.push_str(&format!("stalk = {}\n", orders.join(" ")));
        for (g, m) in &self.monodromy {
            out.push_str(&format!("monodromy {g} = {}\n", fmt_matrix(m)));
        }
        out
    }

    /// Build the lisse sheaf, resolving generator names against the
    /// fundamental group presentation.
    pub fn sheaf(&self) -> Result<LisseSheaf> {
        let pi1 = self.curve.pi1_presentation()?;
        let stalk = LambdaModule::from_orders(self.modulus, &self.stalk_orders);
        let rank = stalk.rank();
        let mut mats = vec![LambdaMatrix::identity(self.modulus, rank); pi1.pres.ngens()];
        for (name, rows) in &self.monodromy {
            let gi = pi1.pres.gen_index(name).ok_or_else(|| {
                Error::invalid(format!(
                    "monodromy for unknown generator '{name}'; generators are {:?}",
                    pi1.pres.gen_names()
                ))
            })?;
            if rows.len() != rank || rows.iter().any(|r| r.len() != rank) {
                return Err(Error::invalid(format!(
                    "monodromy matrix for '{name}' must be {rank}x{rank}"
                )));
            }
            mats[gi] = LambdaMatrix::from_rows(self.modulus, rank, rows);
        }
        LisseSheaf::new(&self.curve, self.modulus, stalk, mats)
    }

    /// Frobenius datum, defaulting to the identity automorphism.
    pub fn frobenius(&self) -> Result<crate::arithmetic::FrobeniusDatum> {
        let pi1 = self.curve.pi1_presentation()?;
        let ngens = pi1.pres.ngens();
        let mut gen_words: Vec<Word> = (0..ngens).map(|i| vec![(i + 1) as i32]).collect();
        for (g, w) in &self.frobenius_words {
            let gi = pi1.pres.gen_index(g).ok_or_else(|| {
                Error::invalid(format!("frobenius for unknown generator '{g}'"))
            })?;
            let mut word = Word::new();
            for (name, inv) in w {
                let idx = pi1.pres.gen_index(name).ok_or_else(|| {
                    Error::invalid(format!("frobenius word uses unknown generator '{name}'"))
                })? as i32
                    + 1;
                word.push(if *inv { -idx } else { idx });
            }
            gen_words[gi] = word;
        }
        let stalk_matrix = match &self.frobenius_stalk {
            Some(rows) => {
                let rank = self.stalk_orders.len();
                if rows.len() != rank || rows.iter().any(|r| r.len() != rank) {
                    return Err(Error::invalid(format!(
                        "frobenius-stalk must be {rank}x{rank}"
                    )));
                }
                Some(LambdaMatrix::from_rows(self.modulus, rank, rows))
            }
            None => None,
        };
        Ok(crate::arithmetic::FrobeniusDatum {
            gen_words,
            stalk_matrix,
        })
    }
}

fn fmt_matrix(m: &[Vec<u64>]) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| {
            let entries: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            format!("[{}]", entries.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORUS: &str = "\
[curve]
component c0 genus=1 punctures=0
[base]
kind = separably-closed
[sheaf]
modulus = 2
";

    #[test]
    fn parses_minimal_torus() {
        let doc = CurveDocument::parse("torus.doc", TORUS).unwrap();
        assert_eq!(doc.curve.components.len(), 1);
        assert_eq!(doc.modulus, 2);
        assert_eq!(doc.stalk_orders, vec![2]);
        let s = doc.sheaf().unwrap();
        assert_eq!(s.stalk.rank(), 1);
        // canonical form reparses to the same canonical form
        let doc2 = CurveDocument::parse("canon", &doc.canonical).unwrap();
        assert_eq!(doc.canonical, doc2.canonical);
    }

    #[test]
    fn parses_nodal_cubic_with_point() {
        let text = "\
[curve]
component c0 genus=0 punctures=0 marked=p,q
point node = c0:p c0:q
[base]
kind = separably-closed
[sheaf]
modulus = 3
";
        let doc = CurveDocument::parse("nodal.doc", text).unwrap();
        assert_eq!(doc.curve.singular.len(), 1);
        assert_eq!(doc.curve.singular[0].branches.len(), 2);
    }

    #[test]
    fn error_carries_line_number() {
        let text = "\
[curve]
component c0 genus=1
[sheaf]
modulus = banana
";
        let err = CurveDocument::parse("bad.doc", text).unwrap_err();
        assert!(err.to_string().contains("bad.doc:4:"), "{err}");
    }

    #[test]
    fn reused_marked_point_is_invalid_input() {
        let text = "\
[curve]
component c0 genus=0 punctures=0 marked=p,q
point n1 = c0:p c0:q
point n2 = c0:p c0:q
[sheaf]
modulus = 2
";
        let err = CurveDocument::parse("dup.doc", text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("more than one"), "{err}");
    }

    #[test]
    fn monodromy_and_frobenius_resolution() {
        let text = "\
[curve]
component c0 genus=1 punctures=0
[base]
kind = finite-field
frobenius a0_1 = a0_1
frobenius b0_1 = a0_1 b0_1
[sheaf]
modulus = 2
stalk = 2 2
monodromy a0_1 = [[0,1],[1,0]]
";
        let doc = CurveDocument::parse("ff.doc", text).unwrap();
        let s = doc.sheaf().unwrap();
        assert_eq!(s.stalk.rank(), 2);
        let f = doc.frobenius().unwrap();
        assert_eq!(f.gen_words, vec![vec![1], vec![1, 2]]);
    }

    #[test]
    fn unknown_generator_rejected() {
        let text = "\
[curve]
component c0 genus=1 punctures=0
[sheaf]
modulus = 2
monodromy zz = [[1]]
";
        let err = CurveDocument::parse("g.doc", text).unwrap_err();
        assert!(err.to_string().contains("unknown generator 'zz'"));
    }
}
