//! Python bindings: curve documents in, orders and pairing tables out.
//!
//! The module mirrors the CLI surface at the level a notebook wants:
//! parse a document once, then ask for validation data, tower orders,
//! cohomology orders, effaceability verdicts, and cup product tables.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use curvecoh::arithmetic::{cup12, h1_h2_arithmetic, h3_arithmetic, ArithmeticTower};
use curvecoh::curves::BaseKind;
use curvecoh::document::CurveDocument;
use curvecoh::error::Error;
use curvecoh::groupcohom::Backend;
use curvecoh::limits::Limits;
use curvecoh::sheafcohom::{cup11, effaceability_check, h0, h1, h2, LisseSheaf, Tower};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_backend(s: &str) -> PyResult<Backend> {
    s.parse().map_err(to_py_err)
}

#[pyclass]
struct CurveDoc {
    doc: CurveDocument,
    sheaf: LisseSheaf,
    limits: Limits,
}

#[pymethods]
impl CurveDoc {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let doc = CurveDocument::parse("<python>", text).map_err(to_py_err)?;
        let sheaf = doc.sheaf().map_err(to_py_err)?;
        let limits = doc.limits.clone();
        Ok(CurveDoc { doc, sheaf, limits })
    }

    /// Combinatorial validation data of the curve model.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = self.doc.curve.validate().map_err(to_py_err)?;
        let d = PyDict::new(py);
        d.set_item("components", r.components)?;
        d.set_item("singular_points", r.singular_points)?;
        d.set_item("branch_counts", r.branch_counts)?;
        d.set_item("betti", r.betti)?;
        d.set_item("euler_characteristic", r.euler_characteristic)?;
        let (eligible, why) = self.doc.curve.kpi1_eligibility();
        d.set_item("genus_hypothesis", eligible)?;
        d.set_item("genus_hypothesis_detail", why)?;
        Ok(d)
    }

    /// Generator names of the fundamental group presentation.
    fn generators(&self) -> PyResult<Vec<String>> {
        let pi1 = self.doc.curve.pi1_presentation().map_err(to_py_err)?;
        Ok(pi1.pres.gen_names().to_vec())
    }

    /// Cyclic orders of H¹(X, Λ).
    fn h1_orders(&self) -> PyResult<Vec<u64>> {
        let m = self.doc.curve.h1_module(self.doc.modulus).map_err(to_py_err)?;
        Ok(m.orders().to_vec())
    }

    /// Orders of the trivializing quotient and the tower levels.
    #[pyo3(signature = (depth = 3))]
    fn tower_orders(&self, depth: usize) -> PyResult<Vec<u64>> {
        let t = Tower::build(&self.sheaf, depth, &self.limits).map_err(to_py_err)?;
        Ok(t.orders())
    }

    /// Cyclic orders of H^degree of the sheaf (degree ≤ 3). On a finite
    /// base field the arithmetic pipeline is used.
    #[pyo3(signature = (degree, depth = 3, backend = "auto"))]
    fn cohomology_orders(&self, degree: usize, depth: usize, backend: &str) -> PyResult<Vec<u64>> {
        let backend = parse_backend(backend)?;
        let arithmetic = self.doc.curve.base == BaseKind::FiniteField;
        let orders = match (degree, arithmetic) {
            (0, _) => h0(&self.sheaf, &self.limits).map_err(to_py_err)?.orders().to_vec(),
            (1, false) => {
                let t = Tower::build(&self.sheaf, depth, &self.limits).map_err(to_py_err)?;
                h1(&t, backend, &self.limits)
                    .map_err(to_py_err)?
                    .cohomology
                    .orders()
                    .to_vec()
            }
            (2, false) => {
                let t = Tower::build(&self.sheaf, depth, &self.limits).map_err(to_py_err)?;
                h2(&t, backend, &self.limits)
                    .map_err(to_py_err)?
                    .module
                    .orders()
                    .to_vec()
            }
            (3, false) => vec![],
            (1, true) | (2, true) => {
                let frob = self.doc.frobenius().map_err(to_py_err)?;
                let t = ArithmeticTower::build(&self.sheaf, &frob, depth, &self.limits)
                    .map_err(to_py_err)?;
                let r = h1_h2_arithmetic(&t, backend, &self.limits).map_err(to_py_err)?;
                if degree == 1 {
                    r.h1.cohomology.orders().to_vec()
                } else {
                    r.h2.module.orders().to_vec()
                }
            }
            (3, true) => {
                let frob = self.doc.frobenius().map_err(to_py_err)?;
                let t = ArithmeticTower::build(&self.sheaf, &frob, depth, &self.limits)
                    .map_err(to_py_err)?;
                h3_arithmetic(&t, 2, 3, backend, &self.limits)
                    .map_err(to_py_err)?
                    .module
                    .orders()
                    .to_vec()
            }
            _ => return Err(PyValueError::new_err("degree must be 0..=3")),
        };
        Ok(orders)
    }

    /// Whether every basis class of H^degree dies at the next tower level.
    #[pyo3(signature = (degree, depth = 3))]
    fn effaceability(&self, degree: usize, depth: usize) -> PyResult<bool> {
        let t = Tower::build(&self.sheaf, depth, &self.limits).map_err(to_py_err)?;
        let rep = effaceability_check(&t, degree, false, Backend::Auto, &self.limits)
            .map_err(to_py_err)?;
        Ok(rep.all_die())
    }

    /// The H¹ × H¹ → H² pairing: (left, right, target orders, table).
    fn cup11<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let p = cup11(&self.sheaf, &self.sheaf, Backend::Auto, &self.limits).map_err(to_py_err)?;
        pairing_dict(py, &p)
    }

    /// The H¹ × H² → H³ pairing over a finite base field.
    fn cup12<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        if self.doc.curve.base != BaseKind::FiniteField {
            return Err(PyValueError::new_err("cup12 needs a finite-field base"));
        }
        let frob = self.doc.frobenius().map_err(to_py_err)?;
        let p = cup12(&self.sheaf, &self.sheaf, &frob, Backend::Auto, &self.limits)
            .map_err(to_py_err)?;
        pairing_dict(py, &p)
    }

    /// Canonical re-serialization of the document.
    fn canonical(&self) -> String {
        self.doc.canonical.clone()
    }
}

fn pairing_dict<'py>(
    py: Python<'py>,
    p: &curvecoh::sheafcohom::CupPairing,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("left_orders", p.left_orders.clone())?;
    d.set_item("right_orders", p.right_orders.clone())?;
    d.set_item("target_orders", p.target_orders.clone())?;
    let table = PyList::empty(py);
    for row in &p.table {
        let r = PyList::empty(py);
        for cell in row {
            r.append(cell.clone())?;
        }
        table.append(r)?;
    }
    d.set_item("table", table)?;
    Ok(d)
}

/// Howell canonical form of a matrix over Z/n, for quick sanity checks
/// from notebooks.
#[pyfunction]
fn howell_form(n: u64, rows: Vec<Vec<u64>>) -> PyResult<Vec<Vec<u64>>> {
    if n < 2 {
        return Err(PyValueError::new_err("modulus must be at least 2"));
    }
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    let m = curvecoh::linalg::LambdaMatrix::from_rows(n, cols, &rows);
    Ok(curvecoh::linalg::howell_form(&m).h.to_row_vecs())
}

#[pymodule]
fn curvecoh_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<CurveDoc>()?;
    m.add_function(wrap_pyfunction!(howell_form, m)?)?;
    Ok(())
}
