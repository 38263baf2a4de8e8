#ifndef GRASSDEX_H
#define GRASSDEX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GdxStatus {
  GDX_STATUS_OK = 0,
  GDX_STATUS_NULL_POINTER = 1,
  GDX_STATUS_INVALID_UTF8 = 2,
  GDX_STATUS_PARSE = 3,
  GDX_STATUS_INVALID_ARGUMENT = 4,
  GDX_STATUS_NOT_FOUND = 5,
  GDX_STATUS_UNSUPPORTED = 6,
  GDX_STATUS_SINGULAR = 7,
  GDX_STATUS_CAP_EXCEEDED = 8,
  GDX_STATUS_IO = 9,
  GDX_STATUS_PANIC = 10,
} GdxStatus;

typedef struct GdxConfiguration GdxConfiguration;

typedef struct GdxLattice GdxLattice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *gdx_last_error(void);

/*
 # Safety
 `s` must be NULL or a string returned by this library.
 */
void gdx_string_free(char *s);

/*
 Parses configuration JSON (`{"n", "m", "points", "gram"?}`).

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GdxStatus gdx_configuration_from_json(const char *json, struct GdxConfiguration **out);

/*
 # Safety
 `cfg` must be NULL or a handle from this library, not used afterwards.
 */
void gdx_configuration_free(struct GdxConfiguration *cfg);

/*
 Number of points, or 0 for NULL.

 # Safety
 `cfg` must be NULL or a live handle.
 */
size_t gdx_configuration_len(const struct GdxConfiguration *cfg);

/*
 Subspace dimension `m`, or 0 for NULL.

 # Safety
 `cfg` must be NULL or a live handle.
 */
size_t gdx_configuration_dim(const struct GdxConfiguration *cfg);

/*
 Ambient dimension `n`, or 0 for NULL.

 # Safety
 `cfg` must be NULL or a live handle.
 */
size_t gdx_configuration_ambient(const struct GdxConfiguration *cfg);

/*
 # Safety
 `cfg` must be a live handle and `out` a valid pointer.
 */
enum GdxStatus gdx_configuration_to_json(const struct GdxConfiguration *cfg, char **out);

/*
 Checks the configuration for `t = 1..=t`; `*is_design` is 1 when it is a
 `2t`-design. When `report_json` is not NULL it receives the full report.

 # Safety
 `cfg` must be a live handle; `is_design` must be valid; `report_json` may be NULL.
 */
enum GdxStatus gdx_verify_design(const struct GdxConfiguration *cfg,
                                 uint32_t t,
                                 int32_t *is_design,
                                 char **report_json);

/*
 Catalog lattice by name (`Z<n>`, `D4`, `E6`, `E7`, `E8`, `BW4`, `BW8`, `BW16`).

 # Safety
 `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GdxStatus gdx_lattice_catalog(const char *name, struct GdxLattice **out);

/*
 Lattice from JSON with a `basis` or `gram` field.

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GdxStatus gdx_lattice_from_json(const char *json, struct GdxLattice **out);

/*
 # Safety
 `lat` must be NULL or a handle from this library, not used afterwards.
 */
void gdx_lattice_free(struct GdxLattice *lat);

/*
 Determinant as a rational string.

 # Safety
 `lat` must be a live handle and `out` a valid pointer.
 */
enum GdxStatus gdx_lattice_det(const struct GdxLattice *lat, char **out);

/*
 Minimal `m`-sections as a configuration.

 # Safety
 `lat` must be a live handle and `out` a valid pointer.
 */
enum GdxStatus gdx_lattice_sections(const struct GdxLattice *lat,
                                    size_t m,
                                    struct GdxConfiguration **out);

/*
 `D_Sigma` for all totally isotropic `w`-subspaces (`use_spread == 0`) or a spread.

 # Safety
 `out` must be a valid pointer.
 */
enum GdxStatus gdx_clifford_design(size_t k,
                                   size_t w,
                                   int32_t use_spread,
                                   struct GdxConfiguration **out);

/*
 `c_{m,n}(2t)` as a rational string.

 # Safety
 `out` must be a valid pointer.
 */
enum GdxStatus gdx_constant_c(size_t m, size_t n, uint32_t t, char **out);

/*
 Library version string (static, do not free).
 */
const char *gdx_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRASSDEX_H */
