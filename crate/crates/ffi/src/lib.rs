// Copyright 2026 The ctxbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


//! C ABI over the ctxbridge core.
//!
//! Every fallible call returns a [`CtxStatus`]. On failure the message is
//! kept per thread and read with [`ctx_last_error`]. Strings handed out by
//! the library are owned by the caller and released with
//! [`ctx_string_free`]. Engines and contracts are opaque handles with their
//! own `_free` functions.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use ctxbridge::contract::{parse_contract, Contract};
use ctxbridge::envelope::{decode, encode};
use ctxbridge::gateway::{route_for, DeviceStates, Route};
use ctxbridge::harness::dsl::{parse_command_line, parse_expectation_line};
use ctxbridge::harness::{load_scenario, run, Engine, Seed};
use ctxbridge::registry::{distance_km, LocationFix};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtxStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    DomainError = 4,
    ExpectationFailed = 5,
    IoError = 6,
    Panic = 7,
}

/// Alarm route, as in the gateway truth table.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtxRoute {
    DbOnly = 0,
    Pda = 1,
    Tv = 2,
    Queued = 3,
}

impl From<Route> for CtxRoute {
    fn from(r: Route) -> Self {
        match r {
            Route::DbOnly => CtxRoute::DbOnly,
            Route::Pda => CtxRoute::Pda,
            Route::Tv => CtxRoute::Tv,
            Route::Queued => CtxRoute::Queued,
        }
    }
}

/// A parsed contract.
pub struct CtxContract(Contract);

/// A simulator engine driven one DSL line at a time.
pub struct CtxEngine(Engine);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CtxStatus, String);

type Out<T> = Result<T, Failure>;

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', "\\0")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Out<()>) -> CtxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CtxStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CtxStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Out<&'a str> {
    if p.is_null() {
        return Err(Failure(CtxStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(CtxStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn write<T>(out: *mut T, v: T) -> Out<()> {
    if out.is_null() {
        return Err(Failure(CtxStatus::NullArgument, "output pointer is null".into()));
    }
    out.write(v);
    Ok(())
}

fn owned(s: String) -> Out<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(CtxStatus::DomainError, "result contains a NUL byte".into()))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Out<&'a T> {
    p.as_ref()
        .ok_or_else(|| Failure(CtxStatus::NullArgument, format!("{what} is null")))
}

fn parse_err(e: impl ToString) -> Failure {
    Failure(CtxStatus::ParseError, e.to_string())
}

fn domain_err(e: impl ToString) -> Failure {
    Failure(CtxStatus::DomainError, e.to_string())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ctx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by the library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ctx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn ctx_contract_parse(src: *const c_char, out: *mut *mut CtxContract) -> CtxStatus {
    guard(|| {
        let c = parse_contract(text(src, "src")?).map_err(parse_err)?;
        write(out, Box::into_raw(Box::new(CtxContract(c))))
    })
}

/// Canonical text of `c`.
#[no_mangle]
pub unsafe extern "C" fn ctx_contract_render(c: *const CtxContract, out: *mut *mut c_char) -> CtxStatus {
    guard(|| {
        let c = handle(c, "contract")?;
        write(out, owned(c.0.render())?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ctx_contract_soap_action(
    c: *const CtxContract,
    op: *const c_char,
    out: *mut *mut c_char,
) -> CtxStatus {
    guard(|| {
        let c = handle(c, "contract")?;
        let a = c.0.soap_action(text(op, "op")?).map_err(domain_err)?;
        write(out, owned(a)?)
    })
}

/// Number of operations in `c`; 0 for null.
#[no_mangle]
pub unsafe extern "C" fn ctx_contract_op_count(c: *const CtxContract) -> usize {
    c.as_ref().map_or(0, |c| c.0.operations.len())
}

#[no_mangle]
pub unsafe extern "C" fn ctx_contract_free(c: *mut CtxContract) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Decodes an envelope and writes its canonical encoding.
#[no_mangle]
pub unsafe extern "C" fn ctx_envelope_canonicalize(bytes: *const u8, len: usize, out: *mut *mut c_char) -> CtxStatus {
    guard(|| {
        let input = if len == 0 {
            &[][..]
        } else if bytes.is_null() {
            return Err(Failure(CtxStatus::NullArgument, "bytes is null".into()));
        } else {
            std::slice::from_raw_parts(bytes, len)
        };
        let m = decode(input).map_err(parse_err)?;
        let s = String::from_utf8(encode(&m)).map_err(domain_err)?;
        write(out, owned(s)?)
    })
}

/// Equirectangular distance in km between two points in degrees.
#[no_mangle]
pub unsafe extern "C" fn ctx_distance_km(lon1: f64, lat1: f64, lon2: f64, lat2: f64, out: *mut f64) -> CtxStatus {
    guard(|| {
        let a = LocationFix::new("a", lon1, lat1).map_err(domain_err)?;
        let b = LocationFix::new("b", lon2, lat2).map_err(domain_err)?;
        write(out, distance_km(&a, &b))
    })
}

#[no_mangle]
pub extern "C" fn ctx_route(critical: bool, pda_on: bool, tv_on: bool) -> CtxRoute {
    route_for(critical, DeviceStates { pda_on, tv_on }).into()
}

/// New engine. `seed` is `"empty"`, `"case-study"` or a directory of
/// registry tables; null means the case study.
#[no_mangle]
pub unsafe extern "C" fn ctx_engine_new(seed: *const c_char, out: *mut *mut CtxEngine) -> CtxStatus {
    guard(|| {
        let seed = if seed.is_null() {
            Seed::CaseStudy
        } else {
            match text(seed, "seed")? {
                "empty" => Seed::Empty,
                "case-study" => Seed::CaseStudy,
                dir => Seed::Dir(PathBuf::from(dir)),
            }
        };
        let e = Engine::from_seed(&seed).map_err(|e| Failure(CtxStatus::IoError, e.to_string()))?;
        write(out, Box::into_raw(Box::new(CtxEngine(e))))
    })
}

/// Runs one scenario command line (without the `at <tick>` prefix) one
/// tick after the last. `out` receives the JSON result and may be null.
#[no_mangle]
pub unsafe extern "C" fn ctx_engine_execute(e: *mut CtxEngine, line: *const c_char, out: *mut *mut c_char) -> CtxStatus {
    guard(|| {
        let e = e
            .as_mut()
            .ok_or_else(|| Failure(CtxStatus::NullArgument, "engine is null".into()))?;
        let cmd = parse_command_line(text(line, "line")?).map_err(parse_err)?;
        let tick = e.0.tick() + 1;
        let v = e.0.execute(tick, &cmd).map_err(|err| domain_err(format!("{}: {err}", err.code())))?;
        if out.is_null() {
            Ok(())
        } else {
            write(out, owned(v.to_string())?)
        }
    })
}

/// Checks one expectation (the text after `expect`) against the engine.
#[no_mangle]
pub unsafe extern "C" fn ctx_engine_expect(e: *const CtxEngine, line: *const c_char) -> CtxStatus {
    guard(|| {
        let e = handle(e, "engine")?;
        let x = parse_expectation_line(text(line, "line")?).map_err(parse_err)?;
        e.0.evaluate(&x)
            .map_err(|actual| Failure(CtxStatus::ExpectationFailed, format!("expected {x}, got {actual}")))
    })
}

#[no_mangle]
pub unsafe extern "C" fn ctx_engine_state_json(e: *const CtxEngine, out: *mut *mut c_char) -> CtxStatus {
    guard(|| {
        let e = handle(e, "engine")?;
        let s = serde_json::to_string(&e.0.gateway().snapshot()).map_err(domain_err)?;
        write(out, owned(s)?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ctx_engine_log_ndjson(e: *const CtxEngine, out: *mut *mut c_char) -> CtxStatus {
    guard(|| {
        let e = handle(e, "engine")?;
        write(out, owned(e.0.log().to_ndjson())?)
    })
}

#[no_mangle]
pub unsafe extern "C" fn ctx_engine_free(e: *mut CtxEngine) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Runs a scenario file. `out_log` receives the NDJSON event log even
/// when expectations fail, and may be null.
#[no_mangle]
pub unsafe extern "C" fn ctx_run_scenario(path: *const c_char, out_log: *mut *mut c_char) -> CtxStatus {
    guard(|| {
        let sc = load_scenario(Path::new(text(path, "path")?)).map_err(|e| match e {
            ctxbridge::harness::dsl::LoadError::Io { .. } => Failure(CtxStatus::IoError, e.to_string()),
            other => parse_err(other),
        })?;
        let r = run(&sc).map_err(|e| Failure(CtxStatus::IoError, e.to_string()))?;
        if !out_log.is_null() {
            write(out_log, owned(r.log().to_ndjson())?)?;
        }
        match r.failures.as_slice() {
            [] => Ok(()),
            fs => Err(Failure(
                CtxStatus::ExpectationFailed,
                fs.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("\n"),
            )),
        }
    })
}
