#ifndef LAMPTILES_H
#define LAMPTILES_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LampStatus {
  LAMP_STATUS_OK = 0,
  LAMP_STATUS_USAGE = 1,
  LAMP_STATUS_PARSE = 2,
  LAMP_STATUS_VALIDITY = 3,
  LAMP_STATUS_BUDGET = 4,
  LAMP_STATUS_FAULT = 5,
  LAMP_STATUS_TIMEOUT = 6,
  LAMP_STATUS_IO = 7,
  LAMP_STATUS_NULL_POINTER = 8,
  LAMP_STATUS_PANIC = 9,
} LampStatus;

// A two-head Turing machine ready to be compiled into a tape.
typedef struct LampMachine LampMachine;

// A substitution on the binary tree.
typedef struct LampSubstitution LampSubstitution;

// A tetrahedron, spider or Wang tileset.
typedef struct LampTileset LampTileset;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the next call.
const char *lamp_last_error(void);

// Library version as a static NUL-terminated string.
const char *lamp_version(void);

// Built-in tileset by name. `param` is the size parameter of `theta1` and `c2`, 0 otherwise;
// `subst` may be null except for `sofic_cover`.
//
// # Safety
// `name` must be a NUL-terminated string, `subst` null or a live handle, `result` writable.
enum LampStatus lamp_tileset_builtin(const char *name,
                                     uintptr_t param,
                                     const struct LampSubstitution *subst,
                                     struct LampTileset **result);

// Tileset from its JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `result` writable.
enum LampStatus lamp_tileset_from_json(const char *json, struct LampTileset **result);

// # Safety
// `tileset` must be null or a handle not yet freed.
void lamp_tileset_free(struct LampTileset *tileset);

// Number of colours of a tileset.
//
// # Safety
// `tileset` must be a live handle and `result` writable.
enum LampStatus lamp_tileset_colour_count(const struct LampTileset *tileset, uintptr_t *result);

// Valid colourings of the region of the given height. `max_nodes` 0 means unlimited.
//
// # Safety
// `tileset` must be a live handle and `result` writable.
enum LampStatus lamp_tileset_count(const struct LampTileset *tileset,
                                   int64_t height,
                                   uint32_t threads,
                                   uint64_t max_nodes,
                                   uint64_t *result);

// Candidate and accepted quadruple counts of the Kari affine construction.
//
// # Safety
// Both out-pointers must be writable.
enum LampStatus lamp_kari_build(uint64_t *candidates, uint64_t *accepted);

// Built-in substitution: `thue_morse`, `period_doubling`, `sunny_side_up` or `cyclic3`.
//
// # Safety
// `name` must be a NUL-terminated string and `result` writable.
enum LampStatus lamp_subst_builtin(const char *name, struct LampSubstitution **result);

// Substitution from its JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `result` writable.
enum LampStatus lamp_subst_from_json(const char *json, struct LampSubstitution **result);

// # Safety
// `subst` must be null or a handle not yet freed.
void lamp_subst_free(struct LampSubstitution *subst);

// Size of the level-`n` language, iterating at most `cap` extra levels. `stabilized` gets 1
// when the language provably stopped changing.
//
// # Safety
// `subst` must be a live handle and both out-pointers writable.
enum LampStatus lamp_subst_language_size(const struct LampSubstitution *subst,
                                         uint32_t n,
                                         uint32_t cap,
                                         uint64_t *size,
                                         uint8_t *stabilized);

// Two-head machine from its JSON description.
//
// # Safety
// `json` must be a NUL-terminated string and `result` writable.
enum LampStatus lamp_machine_from_json(const char *json, struct LampMachine **result);

// # Safety
// `machine` must be null or a handle not yet freed.
void lamp_machine_free(struct LampMachine *machine);

// Runs the machine on whitespace-separated `data` inside a `2^log2_size` square and reports
// the first phase-2 row. Rejection surfaces as `Fault`, running out of rows as `Timeout`.
//
// # Safety
// `machine` must be a live handle, `data` a NUL-terminated string, `accept_row` writable.
enum LampStatus lamp_machine_run(const struct LampMachine *machine,
                                 const char *data,
                                 uint32_t log2_size,
                                 uint64_t *accept_row);

// Level-`k` macrotile sizes: address width, packet length and side. Fails with `Validity`
// when a value does not fit in 64 bits.
//
// # Safety
// All out-pointers must be writable.
enum LampStatus lamp_layout(uint32_t k,
                            uint32_t c,
                            uint64_t program_len,
                            uint64_t *n,
                            uint64_t *packet,
                            uint64_t *side);

// Canonical X_tree colour `(p, q)` of the element with the given lit lamps and head.
//
// # Safety
// `lamps` must point to `lamp_count` values (or be null when the count is 0); `p`, `q` writable.
enum LampStatus lamp_xtree_canonical(const int64_t *lamps,
                                     uintptr_t lamp_count,
                                     int64_t head,
                                     uint8_t *p,
                                     uint8_t *q);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAMPTILES_H */
