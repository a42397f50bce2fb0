//! C ABI over `amenlab`.
//!
//! Every fallible function returns an [`AmenStatus`] and writes results through out-pointers.
//! Objects cross the boundary as opaque handles released with their `*_free` function; strings
//! returned to the caller are released with [`amen_string_free`]. After a failure,
//! [`amen_last_error_message`] describes it until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use amenlab::experiments::{self, Builtin, CloudKind, GraphSource, PipelineInput};
use amenlab::finite::ProjectivePlane;
use amenlab::matrix::{opnorm_value, schatten_norm, DenseMatrix, NormIndex, SchattenOrder, C64};
use amenlab::mazur::{nc_mazur, nc_mazur_inverse};
use amenlab::pipeline::{prod_check, TensorDecomposition};
use amenlab::report::{Report, RunConfig};
use amenlab::LabError;
use serde_json::Value;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmenStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotPrime = 3,
    Parse = 4,
    Precondition = 5,
    Numerical = 6,
    TooLarge = 7,
    Io = 8,
    Panic = 9,
}

pub struct AmenPlane(ProjectivePlane);
pub struct AmenMatrix(DenseMatrix);
pub struct AmenTensor(TensorDecomposition);
pub struct AmenReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(AmenStatus, String);

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        let status = match &e {
            LabError::NotPrime(_) | LabError::PrimeTooLarge { .. } => AmenStatus::NotPrime,
            LabError::Parse(_) => AmenStatus::Parse,
            LabError::Io(_) => AmenStatus::Io,
            LabError::GraphTooLarge { .. } | LabError::ClosureCap { .. } => AmenStatus::TooLarge,
            LabError::SvdFailure
            | LabError::EigenFailure
            | LabError::NonFinite { .. }
            | LabError::NotUnitary(_) => AmenStatus::Numerical,
            LabError::Shape(_)
            | LabError::EmptyMatrix
            | LabError::InvalidP(_)
            | LabError::IndexOutOfRange { .. }
            | LabError::UnknownGenerator(_) => AmenStatus::InvalidArgument,
            _ => AmenStatus::Precondition,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AmenStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(AmenStatus::InvalidArgument, msg.into())
}

fn set_error(msg: Option<String>) {
    let c = msg.map(|m| CString::new(m.replace('\0', " ")).expect("no interior nul"));
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AmenStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(None);
            AmenStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(Some(msg));
            status
        }
        Err(_) => {
            set_error(Some("internal panic".into()));
            AmenStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(h: *const T, what: &str) -> Result<&'a T, Failure> {
    h.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_value<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = value;
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(s).map_err(|_| invalid("string contains a nul byte"))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn free<T>(h: *mut T) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

fn config(json: Option<&str>) -> Result<RunConfig, Failure> {
    match json {
        None => Ok(RunConfig::default()),
        Some(t) => Ok(RunConfig::from_json(t)?),
    }
}

unsafe fn opt_text<'a>(s: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if s.is_null() {
        Ok(None)
    } else {
        text(s, what).map(Some)
    }
}

// ---------------------------------------------------------------- misc

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn amen_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until the next call; do not free.
#[no_mangle]
pub extern "C" fn amen_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn amen_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------- plane

/// Projective plane over `F_l`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_plane_new(l: u64, out: *mut *mut AmenPlane) -> AmenStatus {
    guard(|| put(out, AmenPlane(ProjectivePlane::build(l)?)))
}

/// # Safety
/// `plane` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_plane_len(plane: *const AmenPlane, out: *mut usize) -> AmenStatus {
    guard(|| put_value(out, borrow(plane, "plane")?.0.len()))
}

/// Normalized representative of point `index` and whether it lies in the sign set.
///
/// # Safety
/// `plane` must be a live handle; `xyz` must point to three writable values; `in_sign_set` may be null.
#[no_mangle]
pub unsafe extern "C" fn amen_plane_point(
    plane: *const AmenPlane,
    index: usize,
    xyz: *mut u64,
    in_sign_set: *mut bool,
) -> AmenStatus {
    guard(|| {
        let p = &borrow(plane, "plane")?.0;
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        let rep = p.point(index)?.rep();
        ptr::copy_nonoverlapping(rep.as_ptr(), xyz, 3);
        if !in_sign_set.is_null() {
            *in_sign_set = p.sign_set()[index];
        }
        Ok(())
    })
}

/// # Safety
/// `plane` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn amen_plane_free(plane: *mut AmenPlane) {
    free(plane)
}

// ---------------------------------------------------------------- matrix

/// Row-major complex matrix; `im` may be null for a real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must hold `rows * cols` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn amen_matrix_new(
    rows: usize,
    cols: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut AmenMatrix,
) -> AmenStatus {
    guard(|| {
        if re.is_null() {
            return Err(null("re"));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| invalid("dimensions overflow"))?;
        let re = std::slice::from_raw_parts(re, len);
        let data: Vec<C64> = if im.is_null() {
            re.iter().map(|&x| C64::new(x, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect()
        };
        put(out, AmenMatrix(DenseMatrix::new(rows, cols, data)?))
    })
}

/// # Safety
/// `m` must be a live handle; `rows` and `cols` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn amen_matrix_shape(
    m: *const AmenMatrix,
    rows: *mut usize,
    cols: *mut usize,
) -> AmenStatus {
    guard(|| {
        let m = &borrow(m, "matrix")?.0;
        put_value(rows, m.rows())?;
        put_value(cols, m.cols())
    })
}

/// # Safety
/// `m` must be a live handle; `re` and `im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn amen_matrix_get(
    m: *const AmenMatrix,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> AmenStatus {
    guard(|| {
        let m = &borrow(m, "matrix")?.0;
        if row >= m.rows() || col >= m.cols() {
            return Err(LabError::IndexOutOfRange {
                index: row * m.cols() + col,
                len: m.rows() * m.cols(),
            }
            .into());
        }
        let z = m.get(row, col);
        put_value(re, z.re)?;
        put_value(im, z.im)
    })
}

/// Operator norm on `l_p`; pass `INFINITY` for `p = inf`. Exact only for `p` in `{1, 2, inf}`.
///
/// # Safety
/// `m` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_matrix_opnorm(
    m: *const AmenMatrix,
    p: f64,
    out: *mut f64,
) -> AmenStatus {
    guard(|| {
        let m = &borrow(m, "matrix")?.0;
        put_value(out, opnorm_value(m, NormIndex::new(p)?)?)
    })
}

/// Schatten norm of order 1 (trace) or 2 (Hilbert-Schmidt).
///
/// # Safety
/// `m` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_matrix_schatten(
    m: *const AmenMatrix,
    order: u32,
    out: *mut f64,
) -> AmenStatus {
    guard(|| {
        let m = &borrow(m, "matrix")?.0;
        let order = match order {
            1 => SchattenOrder::One,
            2 => SchattenOrder::Two,
            o => return Err(invalid(format!("Schatten order {o} (expected 1 or 2)"))),
        };
        put_value(out, schatten_norm(m, order)?)
    })
}

/// `U |T|^(1/2)` from the polar decomposition of `T`.
///
/// # Safety
/// `m` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_matrix_mazur(
    m: *const AmenMatrix,
    out: *mut *mut AmenMatrix,
) -> AmenStatus {
    guard(|| put(out, AmenMatrix(nc_mazur(&borrow(m, "matrix")?.0)?)))
}

/// `U |S|^2`, the inverse of [`amen_matrix_mazur`] on the sphere.
///
/// # Safety
/// `m` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_matrix_mazur_inverse(
    m: *const AmenMatrix,
    out: *mut *mut AmenMatrix,
) -> AmenStatus {
    guard(|| put(out, AmenMatrix(nc_mazur_inverse(&borrow(m, "matrix")?.0)?)))
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn amen_matrix_free(m: *mut AmenMatrix) {
    free(m)
}

// ---------------------------------------------------------------- tensor decompositions

/// Parses a decomposition from JSON.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_tensor_from_json(
    json: *const c_char,
    out: *mut *mut AmenTensor,
) -> AmenStatus {
    guard(|| {
        let t = TensorDecomposition::from_json(text(json, "json")?)?;
        t.validate()?;
        put(out, AmenTensor(t))
    })
}

/// Built-in candidate: `exact-diagonal`, `rank1`, `truncated`, `perturbed` or `orbit-sample`.
/// `config_json` may be null for the defaults.
///
/// # Safety
/// `name` must be a nul-terminated string, `config_json` null or one; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_tensor_builtin(
    name: *const c_char,
    config_json: *const c_char,
    out: *mut *mut AmenTensor,
) -> AmenStatus {
    guard(|| {
        let b = Builtin::parse(text(name, "name")?)?;
        let cfg = config(opt_text(config_json, "config_json")?)?;
        put(out, AmenTensor(experiments::builtin_candidate(&cfg, b)?))
    })
}

/// Number of pairs.
///
/// # Safety
/// `t` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_tensor_rank(t: *const AmenTensor, out: *mut usize) -> AmenStatus {
    guard(|| put_value(out, borrow(t, "tensor")?.0.rank()))
}

/// Largest entry of `sum a_i b_i - 1`.
///
/// # Safety
/// `t` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_tensor_prod_defect(
    t: *const AmenTensor,
    out: *mut f64,
) -> AmenStatus {
    guard(|| put_value(out, prod_check(&borrow(t, "tensor")?.0)?))
}

/// JSON serialization; free with [`amen_string_free`].
///
/// # Safety
/// `t` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_tensor_to_json(
    t: *const AmenTensor,
    out: *mut *mut c_char,
) -> AmenStatus {
    guard(|| put_string(out, borrow(t, "tensor")?.0.to_json()))
}

/// Runs the rank-obstruction pipeline on the decomposition.
///
/// # Safety
/// `t` must be a live handle, `config_json` null or a nul-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_tensor_run_pipeline(
    t: *const AmenTensor,
    config_json: *const c_char,
    out: *mut *mut AmenReport,
) -> AmenStatus {
    guard(|| {
        let t = &borrow(t, "tensor")?.0;
        let cfg = config(opt_text(config_json, "config_json")?)?;
        put(out, AmenReport(experiments::pipeline_for(&cfg, t)?))
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn amen_tensor_free(t: *mut AmenTensor) {
    free(t)
}

// ---------------------------------------------------------------- experiments

fn field<'a>(req: &'a Value, key: &str) -> Option<&'a Value> {
    req.get(key).filter(|v| !v.is_null())
}

fn uint(req: &Value, key: &str, default: u64) -> Result<u64, Failure> {
    match field(req, key) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .ok_or_else(|| invalid(format!("'{key}' must be a nonnegative integer"))),
    }
}

fn string<'a>(req: &'a Value, key: &str, default: &'a str) -> Result<&'a str, Failure> {
    match field(req, key) {
        None => Ok(default),
        Some(v) => v
            .as_str()
            .ok_or_else(|| invalid(format!("'{key}' must be a string"))),
    }
}

fn run(name: &str, req: &Value) -> Result<Report, Failure> {
    let cfg = match field(req, "config") {
        None => RunConfig::default(),
        Some(c) => config(Some(&c.to_string()))?,
    };
    let rows = uint(req, "rows", 6)? as usize;
    let cols = uint(req, "cols", 10)? as usize;
    let report = match name {
        "plane" => experiments::plane(&cfg, uint(req, "l", 2)?),
        "group" => experiments::group(&cfg),
        "spectral" => {
            experiments::spectral(&cfg, &GraphSource::parse(string(req, "graph", "cayley2")?)?)
        }
        "mazur" => experiments::mazur(&cfg),
        "lemma21" => experiments::column_inequalities(&cfg, rows, cols),
        "remark22" => experiments::column_ratio(&cfg, rows, cols),
        "coarea" => {
            let sources = match field(req, "graphs") {
                None => {
                    let mut s = experiments::small_graphs();
                    s.push(GraphSource::Cayley(2));
                    s
                }
                Some(v) => v
                    .as_array()
                    .ok_or_else(|| invalid("'graphs' must be an array of strings"))?
                    .iter()
                    .map(|g| {
                        let g = g
                            .as_str()
                            .ok_or_else(|| invalid("'graphs' must be an array of strings"))?;
                        GraphSource::parse(g).map_err(Failure::from)
                    })
                    .collect::<Result<_, _>>()?,
            };
            experiments::coarea(&cfg, &sources)
        }
        "concentration" => {
            let radius = match field(req, "radius") {
                None => 1.0,
                Some(v) => v
                    .as_f64()
                    .ok_or_else(|| invalid("'radius' must be a number"))?,
            };
            experiments::concentration(
                &cfg,
                &GraphSource::parse(string(req, "graph", "cayley2")?)?,
                CloudKind::parse(string(req, "cloud", "random")?)?,
                radius,
            )
        }
        "invariant" => experiments::invariant(&cfg),
        "pipeline" => {
            let input = match field(req, "input") {
                Some(v) => PipelineInput::File(
                    v.as_str()
                        .ok_or_else(|| invalid("'input' must be a path"))?
                        .into(),
                ),
                None => PipelineInput::Builtin(Builtin::parse(string(
                    req,
                    "builtin",
                    "exact-diagonal",
                )?)?),
            };
            experiments::pipeline(&cfg, &input)
        }
        other => return Err(invalid(format!("unknown experiment '{other}'"))),
    };
    Ok(report?)
}

/// Runs an experiment by subcommand name. `request_json` (may be null) is an object with an
/// optional `config` plus the subcommand's arguments, e.g. `{"l": 3}` for `plane` or
/// `{"graph": "petersen"}` for `spectral`.
///
/// # Safety
/// `name` must be a nul-terminated string, `request_json` null or one; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_run_experiment(
    name: *const c_char,
    request_json: *const c_char,
    out: *mut *mut AmenReport,
) -> AmenStatus {
    guard(|| {
        let name = text(name, "name")?;
        let req: Value = match opt_text(request_json, "request_json")? {
            None => Value::Object(Default::default()),
            Some(t) => {
                serde_json::from_str(t).map_err(|e| Failure(AmenStatus::Parse, e.to_string()))?
            }
        };
        if !req.is_object() {
            return Err(invalid("request must be a JSON object"));
        }
        put(out, AmenReport(run(name, &req)?))
    })
}

/// Whether every assertion in the report held.
///
/// # Safety
/// `r` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_report_passed(r: *const AmenReport, out: *mut bool) -> AmenStatus {
    guard(|| put_value(out, borrow(r, "report")?.0.passed))
}

/// Pretty JSON rendering; free with [`amen_string_free`].
///
/// # Safety
/// `r` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_report_json(
    r: *const AmenReport,
    out: *mut *mut c_char,
) -> AmenStatus {
    guard(|| put_string(out, borrow(r, "report")?.0.to_json()))
}

/// CSV rendering with its `#` header line; free with [`amen_string_free`].
///
/// # Safety
/// `r` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn amen_report_csv(
    r: *const AmenReport,
    out: *mut *mut c_char,
) -> AmenStatus {
    guard(|| put_string(out, borrow(r, "report")?.0.to_csv()))
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn amen_report_free(r: *mut AmenReport) {
    free(r)
}
