#ifndef GEODIFF_H
#define GEODIFF_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GeodiffStatus {
  GEODIFF_STATUS_OK = 0,
  GEODIFF_STATUS_NULL_ARGUMENT = 1,
  GEODIFF_STATUS_INVALID_UTF8 = 2,
  GEODIFF_STATUS_IO = 3,
  GEODIFF_STATUS_PARSE = 4,
  GEODIFF_STATUS_INVALID_PARAMETER = 5,
  GEODIFF_STATUS_PANIC = 6,
} GeodiffStatus;

typedef enum GeodiffVerdict {
  GEODIFF_VERDICT_AVAILABLE = 0,
  GEODIFF_VERDICT_UNAVAILABLE = 1,
  GEODIFF_VERDICT_DELISTED = 2,
} GeodiffVerdict;

/**
 * Opaque feature set of one APK.
 */
typedef struct GeodiffFeatureSet GeodiffFeatureSet;

/**
 * Opaque similarity report of one pair.
 */
typedef struct GeodiffReport GeodiffReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Free with
 * [`geodiff_string_free`].
 */
char *geodiff_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void geodiff_string_free(char *s);

/**
 * Opens an APK and extracts its features with the bundled library catalog.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum GeodiffStatus geodiff_features_from_apk(const char *path, struct GeodiffFeatureSet **out);

/**
 * Parses a feature set from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum GeodiffStatus geodiff_features_from_json(const char *json, struct GeodiffFeatureSet **out);

/**
 * Canonical JSON of a feature set.
 *
 * # Safety
 * `features` must be a live handle; `out` must be writable.
 */
enum GeodiffStatus geodiff_features_to_json(const struct GeodiffFeatureSet *features, char **out);

/**
 * # Safety
 * `features` must be NULL or a handle from this library, not yet freed.
 */
void geodiff_features_free(struct GeodiffFeatureSet *features);

/**
 * # Safety
 * `left` and `right` must be live handles; `out` must be writable.
 */
enum GeodiffStatus geodiff_compare(const struct GeodiffFeatureSet *left,
                                   const struct GeodiffFeatureSet *right,
                                   struct GeodiffReport **out);

/**
 * Overall score of a report.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum GeodiffStatus geodiff_report_overall(const struct GeodiffReport *report, double *out);

/**
 * Score of feature `index`, in the order permissions, components,
 * certificates, third-party libraries, native libraries, URLs, files,
 * smali files.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum GeodiffStatus geodiff_report_feature_score(const struct GeodiffReport *report,
                                                uint32_t index,
                                                double *out);

/**
 * Canonical JSON of a report.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum GeodiffStatus geodiff_report_to_json(const struct GeodiffReport *report, char **out);

/**
 * # Safety
 * `report` must be NULL or a handle from this library, not yet freed.
 */
void geodiff_report_free(struct GeodiffReport *report);

uint32_t geodiff_hamming(uint64_t a, uint64_t b);

/**
 * # Safety
 * `a` and `b` must be NUL-terminated strings; `out` must be writable.
 */
enum GeodiffStatus geodiff_normalized_levenshtein(const char *a, const char *b, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum GeodiffStatus geodiff_sample_size(uint64_t population,
                                       double confidence,
                                       double margin,
                                       double proportion,
                                       uint64_t *out);

/**
 * dHash of an image file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum GeodiffStatus geodiff_dhash_file(const char *path, uint64_t *out);

/**
 * Classifies a store page with the bundled install markers.
 *
 * # Safety
 * `body` must point to `len` readable bytes (it may be NULL when `len` is
 * 0); `out` must be writable.
 */
enum GeodiffStatus geodiff_classify_page(uint16_t status,
                                         const uint8_t *body,
                                         size_t len,
                                         enum GeodiffVerdict *out);

/**
 * Mines a JSON-lines catalog file and returns the admitted pairs as JSON
 * lines.
 *
 * # Safety
 * `catalog_path` must be a NUL-terminated string; `out` must be writable.
 */
enum GeodiffStatus geodiff_mine_catalog(const char *catalog_path,
                                        uint32_t hamming_max,
                                        double nld_max,
                                        char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GEODIFF_H */
