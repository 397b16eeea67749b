/* Copyright 2026 The ctxbridge Authors. Licensed under the Apache License, Version 2.0. */

#ifndef CTXBRIDGE_H
#define CTXBRIDGE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CtxStatus {
  CTX_STATUS_OK = 0,
  CTX_STATUS_NULL_ARGUMENT = 1,
  CTX_STATUS_INVALID_UTF8 = 2,
  CTX_STATUS_PARSE_ERROR = 3,
  CTX_STATUS_DOMAIN_ERROR = 4,
  CTX_STATUS_EXPECTATION_FAILED = 5,
  CTX_STATUS_IO_ERROR = 6,
  CTX_STATUS_PANIC = 7,
} CtxStatus;

/**
 * Alarm route, as in the gateway truth table.
 */
typedef enum CtxRoute {
  CTX_ROUTE_DB_ONLY = 0,
  CTX_ROUTE_PDA = 1,
  CTX_ROUTE_TV = 2,
  CTX_ROUTE_QUEUED = 3,
} CtxRoute;

/**
 * A parsed contract.
 */
typedef struct CtxContract CtxContract;

/**
 * A simulator engine driven one DSL line at a time.
 */
typedef struct CtxEngine CtxEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *ctx_last_error(void);

/**
 * Frees a string returned by the library. Null is ignored.
 */
void ctx_string_free(char *s);

enum CtxStatus ctx_contract_parse(const char *src, struct CtxContract **out);

/**
 * Canonical text of `c`.
 */
enum CtxStatus ctx_contract_render(const struct CtxContract *c, char **out);

enum CtxStatus ctx_contract_soap_action(const struct CtxContract *c, const char *op, char **out);

/**
 * Number of operations in `c`; 0 for null.
 */
size_t ctx_contract_op_count(const struct CtxContract *c);

void ctx_contract_free(struct CtxContract *c);

/**
 * Decodes an envelope and writes its canonical encoding.
 */
enum CtxStatus ctx_envelope_canonicalize(const uint8_t *bytes, size_t len, char **out);

/**
 * Equirectangular distance in km between two points in degrees.
 */
enum CtxStatus ctx_distance_km(double lon1, double lat1, double lon2, double lat2, double *out);

enum CtxRoute ctx_route(bool critical, bool pda_on, bool tv_on);

/**
 * New engine. `seed` is `"empty"`, `"case-study"` or a directory of
 * registry tables; null means the case study.
 */
enum CtxStatus ctx_engine_new(const char *seed, struct CtxEngine **out);

/**
 * Runs one scenario command line (without the `at <tick>` prefix) one
 * tick after the last. `out` receives the JSON result and may be null.
 */
enum CtxStatus ctx_engine_execute(struct CtxEngine *e, const char *line, char **out);

/**
 * Checks one expectation (the text after `expect`) against the engine.
 */
enum CtxStatus ctx_engine_expect(const struct CtxEngine *e, const char *line);

enum CtxStatus ctx_engine_state_json(const struct CtxEngine *e, char **out);

enum CtxStatus ctx_engine_log_ndjson(const struct CtxEngine *e, char **out);

void ctx_engine_free(struct CtxEngine *e);

/**
 * Runs a scenario file. `out_log` receives the NDJSON event log even
 * when expectations fail, and may be null.
 */
enum CtxStatus ctx_run_scenario(const char *path, char **out_log);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CTXBRIDGE_H */
