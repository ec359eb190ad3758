#ifndef WEBQA_H
#define WEBQA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WebqaStatus {
  WEBQA_STATUS_OK = 0,
  WEBQA_STATUS_NULL_POINTER = 1,
  WEBQA_STATUS_INVALID_UTF8 = 2,
  WEBQA_STATUS_IO = 3,
  WEBQA_STATUS_PARSE = 4,
  WEBQA_STATUS_VERSION = 5,
  WEBQA_STATUS_INVALID_ARGUMENT = 6,
  WEBQA_STATUS_INTERNAL = 7,
  WEBQA_STATUS_PANIC = 8,
} WebqaStatus;

/*
 Examples loaded from a dataset file.
 */
typedef struct WebqaDataset WebqaDataset;

/*
 A trained model plus the word vectors used at prediction time.
 */
typedef struct WebqaModel WebqaModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *webqa_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *webqa_version(void);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void webqa_string_free(char *s);

/*
 Loads a model file and, when `embeddings_path` is not NULL, a word-vector file.

 # Safety
 Paths must be NUL-terminated; `out` must be writable.
 */
enum WebqaStatus webqa_model_load(const char *model_path,
                                  const char *embeddings_path,
                                  struct WebqaModel **out);

/*
 # Safety
 `model` must come from [`webqa_model_load`] and not have been freed. NULL is ignored.
 */
void webqa_model_free(struct WebqaModel *model);

/*
 Number of features in the model's index.

 # Safety
 `model` must be a live handle or NULL (returns 0).
 */
size_t webqa_model_feature_count(const struct WebqaModel *model);

/*
 Predicts the answer set for one dataset record given as JSON
 (`{"id", "question", "answers", "snippets"}`) and writes the prediction record as JSON
 (`{"id", "answers", "scores", "ranking"}`) to `out`.

 # Safety
 `model` must be a live handle; `record_json` NUL-terminated; `out` writable.
 */
enum WebqaStatus webqa_model_predict_json(const struct WebqaModel *model,
                                          const char *record_json,
                                          double margin,
                                          char **out);

/*
 Loads a line-delimited dataset file.

 # Safety
 `path` must be NUL-terminated; `out` writable.
 */
enum WebqaStatus webqa_dataset_load(const char *path, struct WebqaDataset **out);

/*
 # Safety
 `dataset` must come from [`webqa_dataset_load`] and not have been freed. NULL is ignored.
 */
void webqa_dataset_free(struct WebqaDataset *dataset);

/*
 # Safety
 `dataset` must be a live handle or NULL (returns 0).
 */
size_t webqa_dataset_len(const struct WebqaDataset *dataset);

/*
 Predicts every example of `dataset` and writes a JSON array of prediction records.

 # Safety
 Handles must be live; `out` writable.
 */
enum WebqaStatus webqa_model_predict_dataset(const struct WebqaModel *model,
                                             const struct WebqaDataset *dataset,
                                             double margin,
                                             char **out);

/*
 Set F1 between two JSON arrays of answer strings.

 # Safety
 Both strings must be NUL-terminated; `out` writable.
 */
enum WebqaStatus webqa_f1(const char *predicted_json, const char *gold_json, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEBQA_H */
